#include <cmath>

#include "perfal/graph.hpp"

namespace perfal::graph {

namespace {

using Adjacency = const std::vector<int>& (Digraph::*)(int) const;

std::vector<double> brandes(const Digraph& g, Adjacency adj, bool halve) {
  const auto n = static_cast<std::size_t>(g.size());
  std::vector<double> bc(n, 0.0), sigma(n), delta(n);
  std::vector<int> dist(n), order;
  std::vector<std::vector<int>> preds(n);
  for (int s = 0; s < g.size(); ++s) {
    std::fill(sigma.begin(), sigma.end(), 0.0);
    std::fill(delta.begin(), delta.end(), 0.0);
    std::fill(dist.begin(), dist.end(), -1);
    for (auto& p : preds) p.clear();
    order.assign(1, s);
    sigma[static_cast<std::size_t>(s)] = 1.0;
    dist[static_cast<std::size_t>(s)] = 0;
    for (std::size_t head = 0; head < order.size(); ++head) {
      const int v = order[head];
      const auto uv = static_cast<std::size_t>(v);
      for (int w : (g.*adj)(v)) {
        const auto uw = static_cast<std::size_t>(w);
        if (dist[uw] < 0) {
          dist[uw] = dist[uv] + 1;
          order.push_back(w);
        }
        if (dist[uw] == dist[uv] + 1) {
          sigma[uw] += sigma[uv];
          preds[uw].push_back(v);
        }
      }
    }
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const auto uw = static_cast<std::size_t>(*it);
      for (int v : preds[uw]) {
        const auto uv = static_cast<std::size_t>(v);
        delta[uv] += sigma[uv] / sigma[uw] * (1.0 + delta[uw]);
      }
      if (*it != s) bc[uw] += delta[uw];
    }
  }
  if (halve)
    for (auto& b : bc) b /= 2.0;
  return bc;
}

// Distances *to* v, i.e. BFS over in-edges, as for directed closeness.
std::vector<double> closeness(const Digraph& g, Adjacency incoming) {
  const auto n = static_cast<std::size_t>(g.size());
  std::vector<double> out(n, 0.0);
  if (n <= 1) return out;
  std::vector<int> dist(n, -1), order;
  for (int v = 0; v < g.size(); ++v) {
    std::fill(dist.begin(), dist.end(), -1);
    order.assign(1, v);
    dist[static_cast<std::size_t>(v)] = 0;
    double total = 0.0;
    for (std::size_t head = 0; head < order.size(); ++head) {
      const int u = order[head];
      for (int w : (g.*incoming)(u))
        if (dist[static_cast<std::size_t>(w)] < 0) {
          dist[static_cast<std::size_t>(w)] = dist[static_cast<std::size_t>(u)] + 1;
          total += dist[static_cast<std::size_t>(w)];
          order.push_back(w);
        }
    }
    const double reach = static_cast<double>(order.size() - 1);
    if (total > 0) out[static_cast<std::size_t>(v)] = (reach / total) * (reach / static_cast<double>(n - 1));
  }
  return out;
}

std::vector<double> pagerank(const Digraph& g, Adjacency outgoing) {
  constexpr double kDamping = 0.85;
  constexpr double kTolerance = 1e-9;
  constexpr int kMaxIterations = 200;
  const auto n = static_cast<std::size_t>(g.size());
  if (n == 0) return {};
  const double un = static_cast<double>(n);
  std::vector<double> x(n, 1.0 / un), next(n);
  for (int it = 0; it < kMaxIterations; ++it) {
    double dangling = 0.0;
    std::fill(next.begin(), next.end(), 0.0);
    for (int v = 0; v < g.size(); ++v) {
      const auto& nb = (g.*outgoing)(v);
      const double xv = x[static_cast<std::size_t>(v)];
      if (nb.empty()) {
        dangling += xv;
        continue;
      }
      const double share = kDamping * xv / static_cast<double>(nb.size());
      for (int w : nb) next[static_cast<std::size_t>(w)] += share;
    }
    const double base = (1.0 - kDamping) / un + kDamping * dangling / un;
    double err = 0.0;
    for (std::size_t v = 0; v < n; ++v) {
      next[v] += base;
      err += std::abs(next[v] - x[v]);
    }
    x.swap(next);
    if (err < un * kTolerance) break;
  }
  return x;
}

}  // namespace

Centralities centralities(const Digraph& g, bool directed) {
  Centralities c;
  const Adjacency out = directed ? &Digraph::simple_out : &Digraph::undirected;
  const Adjacency in = directed ? &Digraph::simple_in : &Digraph::undirected;
  c.betweenness = brandes(g, out, !directed);
  c.closeness = closeness(g, in);
  c.pagerank = pagerank(g, out);
  return c;
}

}  // namespace perfal::graph
