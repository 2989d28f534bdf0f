#pragma once

#include <utility>
#include <vector>

#include "perfal/common.hpp"
#include "perfal/graph.hpp"

namespace testing {

using EdgeList = std::vector<std::pair<int, int>>;

// Directed multigraph with roughly p*n*(n-1) edges, optional self loops and
// duplicated edges to exercise the simple projection.
inline EdgeList random_edges(perfal::Rng& rng, int n, double p, bool noise = true) {
  EdgeList e;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      if (a == b) continue;
      if (rng.uniform() < p) e.emplace_back(a, b);
    }
  if (noise && n > 0) {
    const auto extra = rng.below(3);
    for (std::uint64_t i = 0; i < extra && !e.empty(); ++i) e.push_back(e[rng.below(e.size())]);
    if (rng.uniform() < 0.5) {
      const int v = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
      e.emplace_back(v, v);
    }
  }
  return e;
}

// Both orientations of each listed pair.
inline EdgeList undirected(const EdgeList& pairs) {
  EdgeList e;
  for (auto [a, b] : pairs) {
    e.emplace_back(a, b);
    e.emplace_back(b, a);
  }
  return e;
}

inline EdgeList complete(int n) {
  EdgeList e;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      if (a != b) e.emplace_back(a, b);
  return e;
}

inline EdgeList cycle(int n) {
  EdgeList e;
  for (int a = 0; a < n; ++a) e.emplace_back(a, (a + 1) % n);
  return e;
}

}  // namespace testing
