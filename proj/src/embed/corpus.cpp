#include <algorithm>
#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "perfal/embed.hpp"
#include "perfal/graph.hpp"
#include "perfal/parallel.hpp"

namespace perfal::embed {

Eigen::VectorXd aggregate(const Eigen::MatrixXd& node_vectors, Aggregation mode) {
  if (mode == Aggregation::None) throw ConfigError("node vectors need mean or sum aggregation");
  if (node_vectors.rows() == 0) return Eigen::VectorXd::Zero(node_vectors.cols());
  Eigen::VectorXd s = node_vectors.colwise().sum().transpose();
  if (mode == Aggregation::Mean) s /= static_cast<double>(node_vectors.rows());
  return s;
}

Eigen::MatrixXd node_embedding(const fa_ast::CodeGraph& g, const EmbeddingConfig& cfg, std::uint64_t seed) {
  switch (cfg.method) {
    case Method::DeepWalk:
    case Method::Node2Vec: {
      if (g.size() == 0) return Eigen::MatrixXd::Zero(0, cfg.dim);
      const bool biased = cfg.method == Method::Node2Vec;
      const auto walks = random_walks(out_adjacency(g), cfg.walks_per_node, cfg.walk_length, biased ? cfg.p : 1.0,
                                      biased ? cfg.q : 1.0, derive_seed(seed, 0x77616c6bULL));
      SkipGramOptions opt;
      opt.dim = cfg.dim;
      opt.window = cfg.window;
      opt.negatives = cfg.negatives;
      opt.epochs = cfg.walk_epochs;
      opt.learning_rate = cfg.learning_rate;
      opt.seed = derive_seed(seed, 0x73676e73ULL);
      return skipgram_fit(walks, static_cast<int>(g.size()), opt).vectors;
    }
    case Method::Hope:
      return hope_fit(simple_adjacency(g), cfg.dim, cfg.beta);
    case Method::GraRep:
      return grarep_fit(simple_adjacency(g), cfg.dim, cfg.grarep_steps);
    default:
      throw ConfigError(std::string(method_name(cfg.method)) + " is not a node-level method");
  }
}

namespace {

void check_split(const Split& split, std::size_t n) {
  std::vector<int> seen(n, 0);
  for (const auto* part : {&split.labeled, &split.unlabeled, &split.test})
    for (int i : *part) {
      if (i < 0 || static_cast<std::size_t>(i) >= n) throw ConfigError("split index out of range");
      if (seen[static_cast<std::size_t>(i)]++) throw ConfigError("split parts overlap");
    }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end()) throw ConfigError("split does not cover the corpus");
}

}  // namespace

EmbeddingMatrix embed_corpus(const std::vector<fa_ast::CodeGraph>& corpus, const Split& split,
                             const EmbeddingConfig& cfg) {
  cfg.validate();
  if (corpus.empty()) throw ConfigError("cannot embed an empty corpus");
  const auto n = corpus.size();
  EmbeddingMatrix out;
  out.config = cfg;
  out.space.assign(n, 0);

  if (cfg.method == Method::Manual) {
    out.rows.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(graph::kMetricCount));
    parallel_for(n, [&](std::size_t i) {
      const auto m = graph::manual_embed(corpus[i]);
      for (std::size_t s = 0; s < m.size(); ++s)
        out.rows(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(s)) = m[s];
    });
    return out;
  }

  const bool split_space = cfg.scope == Scope::SplitSpace;
  if (split_space) {
    check_split(split, n);
    for (int t : split.test) out.space[static_cast<std::size_t>(t)] = 1;
  }
  const auto test_seed = derive_seed(cfg.seed, 1);
  out.rows.resize(static_cast<Eigen::Index>(n), cfg.dim);

  if (cfg.method == Method::Graph2Vec) {
    std::vector<const fa_ast::CodeGraph*> all;
    for (const auto& g : corpus) all.push_back(&g);
    if (!split_space) {
      out.rows = graph2vec_fit(all, cfg, cfg.seed);
      return out;
    }
    std::vector<int> train(split.labeled);
    train.insert(train.end(), split.unlabeled.begin(), split.unlabeled.end());
    std::sort(train.begin(), train.end());
    std::vector<const fa_ast::CodeGraph*> train_graphs;
    for (int i : train) train_graphs.push_back(&corpus[static_cast<std::size_t>(i)]);
    const auto first = graph2vec_fit(train_graphs, cfg, cfg.seed);
    for (std::size_t r = 0; r < train.size(); ++r) out.rows.row(train[r]) = first.row(static_cast<Eigen::Index>(r));
    if (!split.test.empty()) {
      const auto second = graph2vec_fit(all, cfg, test_seed);
      for (int t : split.test) out.rows.row(t) = second.row(t);
    }
    return out;
  }

  parallel_for(n, [&](std::size_t i) {
    const auto seed = out.space[i] ? test_seed : cfg.seed;
    out.rows.row(static_cast<Eigen::Index>(i)) = aggregate(node_embedding(corpus[i], cfg, seed), cfg.aggregation).transpose();
  });
  return out;
}

void save_embedding(const EmbeddingMatrix& m, const std::vector<std::string>& graph_ids, const std::string& csv_path) {
  if (graph_ids.size() != static_cast<std::size_t>(m.rows.rows())) throw ShapeError("one graph id per row expected");
  std::ofstream csv(csv_path);
  if (!csv) throw Error("cannot write " + csv_path);
  csv << "graph_id";
  for (Eigen::Index c = 0; c < m.rows.cols(); ++c) csv << ",dim_" << c;
  csv << '\n';
  char buf[40];
  for (Eigen::Index r = 0; r < m.rows.rows(); ++r) {
    csv << graph_ids[static_cast<std::size_t>(r)];
    for (Eigen::Index c = 0; c < m.rows.cols(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", m.rows(r, c));
      csv << ',' << buf;
    }
    csv << '\n';
  }
  nlohmann::ordered_json side;
  side["config"] = nlohmann::ordered_json::parse(config_to_json(m.config));
  side["test_space_rows"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < m.space.size(); ++i)
    if (m.space[i]) side["test_space_rows"].push_back(graph_ids[i]);
  std::ofstream(csv_path + ".json") << side.dump(2) << '\n';
}

EmbeddingMatrix load_embedding(const std::string& csv_path, std::vector<std::string>* graph_ids) {
  std::ifstream csv(csv_path);
  if (!csv) throw Error("cannot read " + csv_path);
  std::string line;
  std::getline(csv, line);
  std::vector<std::string> ids;
  std::vector<std::vector<double>> rows;
  while (std::getline(csv, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::getline(ss, cell, ',');
    ids.push_back(cell);
    rows.emplace_back();
    while (std::getline(ss, cell, ',')) rows.back().push_back(std::stod(cell));
  }
  EmbeddingMatrix m;
  const auto cols = rows.empty() ? 0 : rows.front().size();
  m.rows.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != cols) throw ShapeError("ragged embedding CSV " + csv_path);
    for (std::size_t c = 0; c < cols; ++c) m.rows(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  }
  m.space.assign(rows.size(), 0);
  std::ifstream side(csv_path + ".json");
  if (side) {
    const auto j = nlohmann::json::parse(side);
    m.config = config_from_json(j.at("config").dump());
    for (const auto& id : j.at("test_space_rows")) {
      auto it = std::find(ids.begin(), ids.end(), id.get<std::string>());
      if (it != ids.end()) m.space[static_cast<std::size_t>(it - ids.begin())] = 1;
    }
  }
  if (graph_ids) *graph_ids = std::move(ids);
  return m;
}

}  // namespace perfal::embed
