#include <algorithm>
#include <map>

#include "perfal/embed.hpp"
#include "perfal/parallel.hpp"
#include "sgns.hpp"

namespace perfal::embed {

namespace {

constexpr std::uint64_t kWlSalt = 0x57'4c'2d'72'65'6c'61'62ULL;  // "WL-relab"

std::uint64_t key_hash(const fa_ast::AstNode& n) {
  auto h = fnv1a(n.kind, kWlSalt);
  h = fnv1a(std::string_view("\x1f", 1), h);
  h = n.token ? fnv1a(*n.token, fnv1a("t", h)) : fnv1a("n", h);
  return splitmix64(h);
}

}  // namespace

WlLabels wl_relabel(const fa_ast::CodeGraph& g, int iterations) {
  if (iterations < 0) throw ConfigError("WL iterations must be non-negative");
  const auto adj = out_adjacency(g);
  WlLabels labels;
  labels.reserve(static_cast<std::size_t>(iterations) + 1);
  std::vector<std::uint64_t> current(g.size());
  for (std::size_t v = 0; v < g.size(); ++v) current[v] = key_hash(g.nodes[v]);
  labels.push_back(current);
  std::vector<std::uint64_t> neigh;
  for (int it = 1; it <= iterations; ++it) {
    const auto& prev = labels.back();
    for (std::size_t v = 0; v < g.size(); ++v) {
      neigh.clear();
      for (int w : adj[v]) neigh.push_back(prev[static_cast<std::size_t>(w)]);
      std::sort(neigh.begin(), neigh.end());
      auto h = hash_combine(kWlSalt, prev[v]);
      h = hash_combine(h, neigh.size());
      for (auto x : neigh) h = hash_combine(h, x);
      current[v] = h;
    }
    labels.push_back(current);
  }
  return labels;
}

std::vector<std::uint64_t> wl_features(const fa_ast::CodeGraph& g, int iterations) {
  const auto labels = wl_relabel(g, iterations);
  std::vector<std::uint64_t> out;
  out.reserve(labels.size() * g.size());
  for (std::size_t it = 0; it < labels.size(); ++it)
    for (auto l : labels[it]) out.push_back(hash_combine(l, it));
  return out;
}

Eigen::MatrixXd graph2vec_fit(const std::vector<const fa_ast::CodeGraph*>& corpus, const EmbeddingConfig& cfg,
                              std::uint64_t seed) {
  if (corpus.empty()) throw ConfigError("graph2vec needs a non-empty corpus");
  std::vector<std::vector<std::uint64_t>> raw(corpus.size());
  parallel_for(corpus.size(), [&](std::size_t i) { raw[i] = wl_features(*corpus[i], cfg.wl_iterations); });

  std::map<std::uint64_t, std::size_t> counts;
  for (const auto& doc : raw)
    for (auto f : doc) ++counts[f];
  // Features are numbered in increasing hash order, which only depends on the corpus.
  std::map<std::uint64_t, int> index;
  std::vector<double> freq;
  for (const auto& [f, c] : counts)
    if (c >= static_cast<std::size_t>(cfg.min_count)) {
      index.emplace(f, static_cast<int>(freq.size()));
      freq.push_back(static_cast<double>(c));
    }

  std::vector<std::vector<int>> docs(corpus.size());
  std::size_t total = 0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    for (auto f : raw[i])
      if (auto it = index.find(f); it != index.end()) docs[i].push_back(it->second);
    total += docs[i].size();
  }

  Rng rng(seed);
  detail::Sgns model(static_cast<int>(corpus.size()), static_cast<int>(freq.size()), cfg.dim, freq, rng);
  const std::size_t schedule = total * static_cast<std::size_t>(cfg.g2v_epochs);
  std::size_t done = 0;
  for (int epoch = 0; epoch < cfg.g2v_epochs; ++epoch)
    for (std::size_t d = 0; d < docs.size(); ++d)
      for (int w : docs[d]) {
        model.step(static_cast<int>(d), w, detail::linear_rate(cfg.learning_rate, done++, schedule), cfg.negatives, rng);
      }
  return model.input_vectors();
}

}  // namespace perfal::embed
