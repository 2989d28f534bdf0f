#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <nlohmann/json.hpp>
#include <sstream>

#include "perfal/fa_ast.hpp"
#include "perfal/harness.hpp"
#include "perfal/synthetic.hpp"

using namespace perfal;
using namespace perfal::harness;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json read_json(const std::string& path) {
  try {
    return nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

// Flat {"flag": value} objects for the single-step commands; present keys win over flags.
template <class T>
void override(const nlohmann::json& j, const char* key, T& target) {
  if (!j.contains(key)) return;
  try {
    target = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

void write_out(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out << text;
  if (!out) throw Error("cannot write " + path);
}

embed::Split read_split(const std::string& path, const std::vector<std::string>& ids) {
  const auto j = read_json(path);
  std::map<std::string, int> index;
  for (std::size_t i = 0; i < ids.size(); ++i) index[ids[i]] = static_cast<int>(i);
  const auto part = [&](const char* key) {
    std::vector<int> out;
    if (!j.contains(key)) return out;
    for (const auto& v : j.at(key)) {
      if (v.is_number_integer()) {
        out.push_back(v.get<int>());
      } else {
        const auto it = index.find(v.get<std::string>());
        if (it == index.end()) throw ConfigError("split names unknown graph '" + v.get<std::string>() + "'");
        out.push_back(it->second);
      }
    }
    return out;
  };
  return {part("labeled"), part("unlabeled"), part("test")};
}

struct ExperimentFlags {
  std::string corpus, labels, depth = "file", aggregation = "mean", out;
  std::vector<std::string> methods, strategies;
  int dim = 128, l0 = 30, batch = 20, budget = 0;
  double test_frac = 0.2;
  std::vector<std::uint64_t> seeds;
  bool per_seed = false;
  unsigned threads = 0;

  void attach(CLI::App* app, bool with_strategies) {
    app->add_option("--corpus", corpus, "directory of .java sources");
    app->add_option("--labels", labels, "CSV path,duration_ms");
    app->add_option("--depth", depth, "file or system")->check(CLI::IsMember({"file", "system"}));
    app->add_option("--label-aggregation", aggregation, "mean or median")->check(CLI::IsMember({"mean", "median"}));
    app->add_option("--out", out, "result directory");
    app->add_option("--method", methods, "embedding methods (repeatable); default graph2vec and manual");
    app->add_option("--dim", dim, "embedding dimension for learned methods");
    if (with_strategies) {
      app->add_option("--strategy", strategies, "query strategies (repeatable); default all four");
      app->add_option("--batch", batch, "batch size |B|");
      app->add_option("--budget", budget, "total labels; 0 = the whole pool");
    }
    app->add_option("--l0", l0, "initial labelled set size");
    app->add_option("--test-frac", test_frac, "held-out test fraction");
    app->add_option("--seeds", seeds, "experiment seeds; default 0..14");
    app->add_flag("--embedding-per-seed", per_seed, "refit seed-dependent embeddings for every seed");
    app->add_option("--threads", threads, "worker threads; 0 = hardware concurrency");
  }

  ExperimentConfig build(const std::string& config_file) const {
    ExperimentConfig c = default_experiment();
    c.corpus_dir = corpus;
    c.labels_file = labels;
    c.depth = fa_ast::parse_depth(depth);
    c.label_aggregation = parse_label_aggregation(aggregation);
    c.output_dir = out;
    if (!methods.empty()) {
      c.embeddings.clear();
      for (const auto& m : methods) {
        embed::EmbeddingConfig e;
        e.method = embed::parse_method(m);
        e.aggregation = embed::default_aggregation(e.method);
        if (e.method != embed::Method::Manual) e.dim = dim;
        c.embeddings.push_back({m, e});
      }
    } else {
      for (auto& e : c.embeddings)
        if (e.config.method != embed::Method::Manual) e.config.dim = dim;
    }
    if (!strategies.empty()) {
      c.strategies.clear();
      for (const auto& s : strategies) c.strategies.push_back(al::parse_strategy(s));
    }
    c.l0_size = l0;
    c.batch_size = batch;
    c.budget = budget;
    c.test_frac = test_frac;
    if (!seeds.empty()) c.seeds = seeds;
    c.embedding_per_seed = per_seed;
    c.threads = threads;
    if (!config_file.empty()) c = experiment_from_json(read_file(config_file), c);
    c.validate();
    return c;
  }
};

void print_result(const ExperimentResult& r) {
  for (const auto& f : r.failures)
    std::fprintf(stderr, "failed cell: %s / %s / seed %llu: %s\n", f.embedding.c_str(), f.strategy.c_str(),
                 static_cast<unsigned long long>(f.seed), f.message.c_str());
  std::fprintf(stderr, "results in %s\n", r.output_dir.string().c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"perfal: active learning of test execution time from code graphs"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_file;
  bool no_cache = false, quiet = false;
  app.add_option("--config", config_file, "JSON config; its values override command-line flags")
      ->check(CLI::ExistingFile);
  app.add_flag("--no-cache", no_cache, "ignore and do not write the artifact cache");
  app.add_flag("-q,--quiet", quiet, "no progress output");

  // parse
  auto* parse = app.add_subcommand("parse", "build FA-AST graphs for a source tree");
  std::string src, depth = "file", out;
  parse->add_option("--src", src, "source directory");
  parse->add_option("--depth", depth, "file or system")->check(CLI::IsMember({"file", "system"}));
  parse->add_option("--out", out, "graph output directory");

  // metrics
  auto* metrics = app.add_subcommand("metrics", "manual metric vector per graph");
  std::string graphs_dir, metrics_out;
  metrics->add_option("--graphs", graphs_dir, "graph directory from `perfal parse`");
  metrics->add_option("--out", metrics_out, "CSV output (stdout when omitted)");

  // embed
  auto* emb = app.add_subcommand("embed", "embed a graph directory");
  std::string emb_graphs, method = "graph2vec", scope = "train-unlabeled-test", split_file, emb_out;
  int emb_dim = 128;
  std::uint64_t emb_seed = 0;
  emb->add_option("--graphs", emb_graphs, "graph directory from `perfal parse`");
  emb->add_option("--method", method, "graph2vec, deepwalk, node2vec, hope, grarep or manual");
  emb->add_option("--dim", emb_dim, "embedding dimension");
  emb->add_option("--scope", scope, "train-unlabeled-test, train-unlabeled or split-space");
  emb->add_option("--seed", emb_seed, "random seed");
  emb->add_option("--split", split_file, "JSON {labeled, unlabeled, test} of graph paths or row indices");
  emb->add_option("--out", emb_out, "embedding CSV (a .json sidecar is written next to it)");

  // passive / active
  auto* passive = app.add_subcommand("passive", "passive baseline: fit on L_0, score on T");
  ExperimentFlags passive_flags;
  passive_flags.attach(passive, false);
  auto* active = app.add_subcommand("active", "full active-learning experiment");
  ExperimentFlags active_flags;
  active_flags.attach(active, true);

  // synth
  auto* syn = app.add_subcommand("synth", "generate a synthetic labelled corpus");
  int synth_n = 300;
  std::uint64_t synth_seed = 0;
  std::string synth_out;
  syn->add_option("--n", synth_n, "number of files (>= 20)");
  syn->add_option("--seed", synth_seed, "generator seed");
  syn->add_option("--out", synth_out, "output directory");

  // report
  auto* rep = app.add_subcommand("report", "markdown summary of a result directory");
  std::string results_dir, report_out;
  rep->add_option("--results", results_dir, "result directory");
  rep->add_option("--out", report_out, "markdown output (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const Progress progress = quiet ? Progress{} : Progress([](const std::string& m) {
    std::fprintf(stderr, "%s\n", m.c_str());
  });
  const Cache cache(!no_cache);

  try {
    // --config for single-step commands: a flat object keyed by flag name
    nlohmann::json flat = nlohmann::json::object();
    const bool experiment = passive->parsed() || active->parsed();
    if (!config_file.empty() && !experiment && !emb->parsed()) flat = read_json(config_file);

    if (parse->parsed()) {
      override(flat, "src", src);
      override(flat, "depth", depth);
      override(flat, "out", out);
      if (src.empty() || out.empty()) throw ConfigError("parse needs --src and --out");
      const auto corpus = parse_directory(src, fa_ast::parse_depth(depth));
      write_graphs(corpus, out);
      for (const auto& f : corpus.report.parse_failed) std::fprintf(stderr, "parse failed: %s\n", f.c_str());
      if (progress) progress("wrote " + std::to_string(corpus.graphs.size()) + " graphs to " + out);
      return 0;
    }
    if (metrics->parsed()) {
      override(flat, "graphs", graphs_dir);
      override(flat, "out", metrics_out);
      if (graphs_dir.empty()) throw ConfigError("metrics needs --graphs");
      write_out(metrics_out, metrics_csv(read_graphs(graphs_dir)));
      return 0;
    }
    if (emb->parsed()) {
      embed::EmbeddingConfig cfg;
      cfg.method = embed::parse_method(method);
      cfg.aggregation = embed::default_aggregation(cfg.method);
      cfg.dim = emb_dim;
      cfg.scope = embed::parse_scope(scope);
      cfg.seed = emb_seed;
      if (!config_file.empty()) {
        const auto j = read_json(config_file);
        override(j, "graphs", emb_graphs);
        override(j, "split", split_file);
        override(j, "out", emb_out);
        auto merged = nlohmann::json::parse(embed::config_to_json(cfg));
        for (const auto& [k, v] : j.items())
          if (k != "graphs" && k != "split" && k != "out") merged[k] = v;
        cfg = embed::config_from_json(merged.dump());
      }
      cfg.validate();
      if (emb_graphs.empty() || emb_out.empty()) throw ConfigError("embed needs --graphs and --out");
      const auto graphs = read_graphs(emb_graphs);
      std::vector<std::string> ids;
      for (const auto& g : graphs) ids.push_back(g.path);
      embed::Split split;
      if (!split_file.empty()) split = read_split(split_file, ids);
      else if (cfg.scope != embed::Scope::TrainUnlabeledTest)
        throw ConfigError("scope " + scope + " needs --split");
      const auto m = embed::embed_corpus(graphs, split, cfg);
      embed::save_embedding(m, ids, emb_out);
      return 0;
    }
    if (passive->parsed() || active->parsed()) {
      auto& flags = passive->parsed() ? passive_flags : active_flags;
      const auto cfg = flags.build(config_file);
      const auto r = passive->parsed() ? run_passive_experiment(cfg, cache, progress)
                                       : run_experiment(cfg, cache, progress);
      if (passive->parsed()) std::cout << read_file((fs::path(cfg.output_dir) / "passive_table.md").string());
      print_result(r);
      return r.exit_code();
    }
    if (syn->parsed()) {
      override(flat, "n", synth_n);
      override(flat, "seed", synth_seed);
      override(flat, "out", synth_out);
      if (synth_out.empty()) throw ConfigError("synth needs --out");
      synth::write_corpus(synth::generate(synth_n, synth_seed), synth_out);
      if (progress) progress("wrote " + std::to_string(synth_n) + " files and labels.csv to " + synth_out);
      return 0;
    }
    if (rep->parsed()) {
      override(flat, "results", results_dir);
      override(flat, "out", report_out);
      if (results_dir.empty()) throw ConfigError("report needs --results");
      write_out(report_out, report(results_dir));
      return 0;
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
