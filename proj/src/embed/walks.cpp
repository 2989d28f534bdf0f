#include <algorithm>

#include "perfal/embed.hpp"
#include "sgns.hpp"

namespace perfal::embed {

Adjacency out_adjacency(const fa_ast::CodeGraph& g) {
  Adjacency adj(g.size());
  for (const auto& e : g.edges)
    if (e.src != e.dst) adj[static_cast<std::size_t>(e.src)].push_back(e.dst);
  for (auto& a : adj) {
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
  }
  return adj;
}

std::vector<std::vector<int>> random_walks(const Adjacency& adj, int walks_per_node, int walk_length, double p,
                                           double q, std::uint64_t seed) {
  if (walk_length < 1) throw ConfigError("walk length must be at least 1");
  if (walks_per_node < 0) throw ConfigError("walks per node must be non-negative");
  if (p <= 0 || q <= 0) throw ConfigError("p and q must be positive");
  const bool uniform = p == 1.0 && q == 1.0;
  Rng rng(seed);
  std::vector<std::vector<int>> walks;
  walks.reserve(adj.size() * static_cast<std::size_t>(walks_per_node));
  std::vector<double> weights;
  for (int r = 0; r < walks_per_node; ++r)
    for (std::size_t start = 0; start < adj.size(); ++start) {
      std::vector<int> walk{static_cast<int>(start)};
      while (walk.size() < static_cast<std::size_t>(walk_length)) {
        const int v = walk.back();
        const auto& nb = adj[static_cast<std::size_t>(v)];
        if (nb.empty()) break;
        if (uniform || walk.size() == 1) {
          walk.push_back(nb[rng.below(nb.size())]);
          continue;
        }
        const int t = walk[walk.size() - 2];
        const auto& tn = adj[static_cast<std::size_t>(t)];
        weights.resize(nb.size());
        double total = 0;
        for (std::size_t i = 0; i < nb.size(); ++i) {
          const int x = nb[i];
          if (x == t)
            weights[i] = 1.0 / p;
          else if (std::binary_search(tn.begin(), tn.end(), x))
            weights[i] = 1.0;
          else
            weights[i] = 1.0 / q;
          total += weights[i];
        }
        double u = rng.uniform() * total;
        std::size_t pick = 0;
        while (pick + 1 < nb.size() && u >= weights[pick]) u -= weights[pick++];
        walk.push_back(nb[pick]);
      }
      walks.push_back(std::move(walk));
    }
  return walks;
}

SkipGramResult skipgram_fit(const std::vector<std::vector<int>>& sequences, int vocab, const SkipGramOptions& opt) {
  if (sequences.empty()) throw ConfigError("skip-gram needs at least one sequence");
  if (vocab <= 0 || opt.dim <= 0 || opt.window < 1) throw ConfigError("invalid skip-gram options");
  std::vector<double> counts(static_cast<std::size_t>(vocab), 0.0);
  std::size_t tokens = 0;
  for (const auto& s : sequences)
    for (int t : s) {
      if (t < 0 || t >= vocab) throw ShapeError("token id outside the vocabulary");
      counts[static_cast<std::size_t>(t)] += 1;
      ++tokens;
    }
  Rng rng(opt.seed);
  detail::Sgns model(vocab, vocab, opt.dim, counts, rng);
  SkipGramResult result;
  const std::size_t schedule = tokens * static_cast<std::size_t>(opt.epochs);
  std::size_t done = 0;
  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    double loss = 0;
    std::size_t pairs = 0;
    for (const auto& s : sequences) {
      const auto n = static_cast<long>(s.size());
      for (long i = 0; i < n; ++i) {
        const double lr = detail::linear_rate(opt.learning_rate, done++, schedule);
        const long w = opt.window - static_cast<long>(rng.below(static_cast<std::uint64_t>(opt.window)));
        for (long j = std::max(0L, i - w); j <= std::min(n - 1, i + w); ++j) {
          if (j == i) continue;
          loss += model.step(s[static_cast<std::size_t>(i)], s[static_cast<std::size_t>(j)], lr, opt.negatives, rng);
          ++pairs;
        }
      }
    }
    result.epoch_loss.push_back(pairs ? loss / static_cast<double>(pairs) : 0.0);
  }
  result.vectors = model.input_vectors();
  return result;
}

}  // namespace perfal::embed
