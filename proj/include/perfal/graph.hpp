#pragma once

#include <array>
#include <limits>
#include <string_view>
#include <utility>
#include <vector>

#include "perfal/code_graph.hpp"

namespace perfal::graph {

/// Directed multigraph over dense node ids [0, n). Out-lists keep parallel
/// edges; simple projections are derived on construction.
class Digraph {
 public:
  Digraph() = default;
  Digraph(int n, const std::vector<std::pair<int, int>>& edges);

  static Digraph from_code_graph(const fa_ast::CodeGraph& g);

  int size() const { return n_; }
  std::size_t edge_count() const { return edge_count_; }  // with multiplicity

  /// Out-neighbours with multiplicity, in insertion order.
  const std::vector<int>& out(int v) const { return out_[static_cast<std::size_t>(v)]; }
  const std::vector<int>& in(int v) const { return in_[static_cast<std::size_t>(v)]; }

  /// Sorted distinct out-neighbours, self-loops removed.
  const std::vector<int>& simple_out(int v) const { return simple_out_[static_cast<std::size_t>(v)]; }
  const std::vector<int>& simple_in(int v) const { return simple_in_[static_cast<std::size_t>(v)]; }
  /// Sorted distinct neighbours in the undirected simple projection.
  const std::vector<int>& undirected(int v) const { return undirected_[static_cast<std::size_t>(v)]; }

  std::size_t simple_edge_count() const { return simple_edge_count_; }
  std::size_t undirected_edge_count() const { return undirected_edge_count_; }

 private:
  int n_ = 0;
  std::size_t edge_count_ = 0;
  std::size_t simple_edge_count_ = 0;
  std::size_t undirected_edge_count_ = 0;
  std::vector<std::vector<int>> out_, in_, simple_out_, simple_in_, undirected_;
};

inline constexpr int kUnreachable = std::numeric_limits<int>::max();

/// All-pairs BFS hop counts, row-major n*n; unreachable pairs are kUnreachable.
std::vector<int> shortest_path_lengths(const Digraph& g, bool directed);

// The metrics below use the undirected simple projection unless noted.

/// Mean finite distance over ordered reachable pairs; 0 when no pair exists.
double characteristic_path_length(const Digraph& g);
double global_efficiency(const Digraph& g);
double local_efficiency(const Digraph& g);
/// Degree assortativity; 0 when the degree variance over edge ends is 0.
double assortativity(const Digraph& g);

struct Clustering {
  double gcc = 0.0;
  double transitivity = 0.0;
};
Clustering clustering(const Digraph& g);

struct BasicMetrics {
  double nodes = 0;
  double edges = 0;     // with multiplicity
  double diameter = 0;  // undirected
  double density = 0;   // directed simple graph
  double avg_degree = 0;  // mean in+out degree of the directed simple graph
};
BasicMetrics basic_metrics(const Digraph& g);

/// Surplus edges over a spanning tree, normalised so trees give 0 and
/// complete graphs give 1; counts undirected simple edges. 0 when n < 3.
double tree_sim(const Digraph& g);

struct Centralities {
  std::vector<double> betweenness;  // unnormalised
  std::vector<double> closeness;    // incoming distances, Wasserman-Faust scaled
  std::vector<double> pagerank;
};

/// Exact Brandes betweenness, closeness and PageRank (damping 0.85, L1
/// tolerance 1e-9, at most 200 iterations). With directed = false all three
/// use the undirected projection and betweenness counts each pair once.
Centralities centralities(const Digraph& g, bool directed = true);

/// Ordered manual-embedding slots.
enum class Metric : std::size_t {
  CharPathLength,
  GlobalEfficiency,
  LocalEfficiency,
  Assortativity,
  Gcc,
  Transitivity,
  NumNodes,
  NumEdges,
  Diameter,
  EdgeDensity,
  AvgDegree,
  TreeSim,
};

inline constexpr std::size_t kMetricCount = 12;
using MetricVector = std::array<double, kMetricCount>;

std::string_view metric_name(Metric m);
inline std::string_view metric_name(std::size_t i) { return metric_name(static_cast<Metric>(i)); }

MetricVector manual_embed(const Digraph& g);
MetricVector manual_embed(const fa_ast::CodeGraph& g);

}  // namespace perfal::graph
