#include <algorithm>
#include <cmath>

#include "perfal/graph.hpp"

namespace perfal::graph {

namespace {

using Adjacency = const std::vector<int>& (Digraph::*)(int) const;

// Hop distances from src; -1 marks unreachable. Returns visit order.
const std::vector<int>& bfs(const Digraph& g, Adjacency adj, int src, std::vector<int>& dist, std::vector<int>& order) {
  std::fill(dist.begin(), dist.end(), -1);
  order.clear();
  dist[static_cast<std::size_t>(src)] = 0;
  order.push_back(src);
  for (std::size_t head = 0; head < order.size(); ++head) {
    const int v = order[head];
    const int dv = dist[static_cast<std::size_t>(v)];
    for (int w : (g.*adj)(v)) {
      auto& dw = dist[static_cast<std::size_t>(w)];
      if (dw < 0) {
        dw = dv + 1;
        order.push_back(w);
      }
    }
  }
  return order;
}

struct DistanceSummary {
  double sum = 0.0;
  double inverse_sum = 0.0;
  std::size_t pairs = 0;  // reachable ordered pairs, self excluded
  int max = 0;
};

DistanceSummary undirected_distances(const Digraph& g) {
  DistanceSummary s;
  const auto n = static_cast<std::size_t>(g.size());
  std::vector<int> dist(n), order;
  for (int v = 0; v < g.size(); ++v) {
    bfs(g, &Digraph::undirected, v, dist, order);
    for (std::size_t i = 1; i < order.size(); ++i) {
      const int d = dist[static_cast<std::size_t>(order[i])];
      s.sum += d;
      s.inverse_sum += 1.0 / d;
      s.max = std::max(s.max, d);
    }
    s.pairs += order.size() - 1;
  }
  return s;
}

// Global efficiency of the subgraph induced by `nodes` (sorted) in the
// undirected projection.
double induced_efficiency(const Digraph& g, const std::vector<int>& nodes) {
  const auto k = nodes.size();
  if (k < 2) return 0.0;
  std::vector<std::vector<int>> adj(k);
  for (std::size_t i = 0; i < k; ++i)
    for (int w : g.undirected(nodes[i])) {
      auto it = std::lower_bound(nodes.begin(), nodes.end(), w);
      if (it != nodes.end() && *it == w) adj[i].push_back(static_cast<int>(it - nodes.begin()));
    }
  double total = 0.0;
  std::vector<int> dist(k), queue;
  for (std::size_t s = 0; s < k; ++s) {
    std::fill(dist.begin(), dist.end(), -1);
    queue.assign(1, static_cast<int>(s));
    dist[s] = 0;
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const int v = queue[head];
      for (int w : adj[static_cast<std::size_t>(v)])
        if (dist[static_cast<std::size_t>(w)] < 0) {
          dist[static_cast<std::size_t>(w)] = dist[static_cast<std::size_t>(v)] + 1;
          total += 1.0 / dist[static_cast<std::size_t>(w)];
          queue.push_back(w);
        }
    }
  }
  return total / (static_cast<double>(k) * static_cast<double>(k - 1));
}

}  // namespace

std::vector<int> shortest_path_lengths(const Digraph& g, bool directed) {
  const auto n = static_cast<std::size_t>(g.size());
  std::vector<int> out(n * n, kUnreachable);
  std::vector<int> dist(n), order;
  const Adjacency adj = directed ? &Digraph::simple_out : &Digraph::undirected;
  for (int v = 0; v < g.size(); ++v) {
    bfs(g, adj, v, dist, order);
    for (int w : order) out[static_cast<std::size_t>(v) * n + static_cast<std::size_t>(w)] = dist[static_cast<std::size_t>(w)];
  }
  return out;
}

double characteristic_path_length(const Digraph& g) {
  if (g.size() <= 1) return 0.0;
  const auto s = undirected_distances(g);
  return s.pairs == 0 ? 0.0 : s.sum / static_cast<double>(s.pairs);
}

double global_efficiency(const Digraph& g) {
  if (g.size() <= 1) return 0.0;
  const auto s = undirected_distances(g);
  const double n = g.size();
  return s.inverse_sum / (n * (n - 1.0));
}

double local_efficiency(const Digraph& g) {
  if (g.size() == 0) return 0.0;
  double total = 0.0;
  for (int v = 0; v < g.size(); ++v) total += induced_efficiency(g, g.undirected(v));
  return total / g.size();
}

double assortativity(const Digraph& g) {
  // Pearson correlation over both orientations of every undirected edge.
  double sx = 0, sxx = 0, sxy = 0, count = 0;
  for (int v = 0; v < g.size(); ++v) {
    const double dv = static_cast<double>(g.undirected(v).size());
    for (int w : g.undirected(v)) {
      const double dw = static_cast<double>(g.undirected(w).size());
      sx += dv;
      sxx += dv * dv;
      sxy += dv * dw;
      count += 1;
    }
  }
  if (count == 0) return 0.0;
  const double mean = sx / count;
  const double var = sxx / count - mean * mean;
  if (var <= 1e-12 * std::max(1.0, mean * mean)) return 0.0;
  const double r = (sxy / count - mean * mean) / var;
  return std::clamp(r, -1.0, 1.0);
}

Clustering clustering(const Digraph& g) {
  Clustering c;
  if (g.size() == 0) return c;
  const auto n = static_cast<std::size_t>(g.size());
  std::vector<char> mark(n, 0);
  double local_sum = 0.0, triangles = 0.0, triads = 0.0;
  for (int v = 0; v < g.size(); ++v) {
    const auto& nb = g.undirected(v);
    const double deg = static_cast<double>(nb.size());
    if (nb.size() < 2) continue;
    for (int w : nb) mark[static_cast<std::size_t>(w)] = 1;
    double links = 0;  // edges among neighbours, each counted twice
    for (int w : nb)
      for (int x : g.undirected(w)) links += mark[static_cast<std::size_t>(x)];
    for (int w : nb) mark[static_cast<std::size_t>(w)] = 0;
    local_sum += links / (deg * (deg - 1.0));
    triangles += links / 2.0;  // triangles through v
    triads += deg * (deg - 1.0) / 2.0;
  }
  c.gcc = local_sum / g.size();
  // Each triangle is seen from its three corners, matching 3 * #triangles.
  c.transitivity = triads == 0 ? 0.0 : triangles / triads;
  return c;
}

BasicMetrics basic_metrics(const Digraph& g) {
  BasicMetrics b;
  const double n = g.size();
  b.nodes = n;
  b.edges = static_cast<double>(g.edge_count());
  if (g.size() > 1) {
    b.diameter = undirected_distances(g).max;
    b.density = static_cast<double>(g.simple_edge_count()) / (n * (n - 1.0));
  }
  if (g.size() > 0) b.avg_degree = 2.0 * static_cast<double>(g.simple_edge_count()) / n;
  return b;
}

double tree_sim(const Digraph& g) {
  if (g.size() < 3) return 0.0;
  const double n = g.size();
  const double e = static_cast<double>(g.undirected_edge_count());
  return std::clamp((e - (n - 1.0)) / ((n - 1.0) * (n / 2.0 - 1.0)), 0.0, 1.0);
}

MetricVector manual_embed(const Digraph& g) {
  MetricVector m{};
  const auto dist = g.size() > 1 ? undirected_distances(g) : DistanceSummary{};
  const double n = g.size();
  m[static_cast<std::size_t>(Metric::CharPathLength)] = dist.pairs == 0 ? 0.0 : dist.sum / static_cast<double>(dist.pairs);
  m[static_cast<std::size_t>(Metric::GlobalEfficiency)] = g.size() > 1 ? dist.inverse_sum / (n * (n - 1.0)) : 0.0;
  m[static_cast<std::size_t>(Metric::LocalEfficiency)] = local_efficiency(g);
  m[static_cast<std::size_t>(Metric::Assortativity)] = assortativity(g);
  const auto c = clustering(g);
  m[static_cast<std::size_t>(Metric::Gcc)] = c.gcc;
  m[static_cast<std::size_t>(Metric::Transitivity)] = c.transitivity;
  m[static_cast<std::size_t>(Metric::NumNodes)] = n;
  m[static_cast<std::size_t>(Metric::NumEdges)] = static_cast<double>(g.edge_count());
  m[static_cast<std::size_t>(Metric::Diameter)] = dist.max;
  m[static_cast<std::size_t>(Metric::EdgeDensity)] =
      g.size() > 1 ? static_cast<double>(g.simple_edge_count()) / (n * (n - 1.0)) : 0.0;
  m[static_cast<std::size_t>(Metric::AvgDegree)] = g.size() > 0 ? 2.0 * static_cast<double>(g.simple_edge_count()) / n : 0.0;
  m[static_cast<std::size_t>(Metric::TreeSim)] = tree_sim(g);
  return m;
}

MetricVector manual_embed(const fa_ast::CodeGraph& g) { return manual_embed(Digraph::from_code_graph(g)); }

std::string_view metric_name(Metric m) {
  switch (m) {
    case Metric::CharPathLength: return "char-path-length";
    case Metric::GlobalEfficiency: return "global-efficiency";
    case Metric::LocalEfficiency: return "local-efficiency";
    case Metric::Assortativity: return "assortativity";
    case Metric::Gcc: return "gcc";
    case Metric::Transitivity: return "transitivity";
    case Metric::NumNodes: return "num-nodes";
    case Metric::NumEdges: return "num-edges";
    case Metric::Diameter: return "diameter";
    case Metric::EdgeDensity: return "edge-density";
    case Metric::AvgDegree: return "avg-degree";
    case Metric::TreeSim: return "tree-sim";
  }
  return "unknown";
}

}  // namespace perfal::graph
