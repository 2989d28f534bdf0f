#include <algorithm>

#include "perfal/common.hpp"
#include "perfal/graph.hpp"

namespace perfal::graph {

namespace {

void sort_unique(std::vector<int>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

}  // namespace

Digraph::Digraph(int n, const std::vector<std::pair<int, int>>& edges) : n_(n) {
  if (n < 0) throw Error("negative node count");
  const auto un = static_cast<std::size_t>(n);
  out_.assign(un, {});
  in_.assign(un, {});
  simple_out_.assign(un, {});
  simple_in_.assign(un, {});
  undirected_.assign(un, {});
  for (const auto& [s, d] : edges) {
    if (s < 0 || s >= n || d < 0 || d >= n) throw Error("edge endpoint out of range");
    out_[static_cast<std::size_t>(s)].push_back(d);
    in_[static_cast<std::size_t>(d)].push_back(s);
    if (s == d) continue;
    simple_out_[static_cast<std::size_t>(s)].push_back(d);
    simple_in_[static_cast<std::size_t>(d)].push_back(s);
    undirected_[static_cast<std::size_t>(s)].push_back(d);
    undirected_[static_cast<std::size_t>(d)].push_back(s);
  }
  edge_count_ = edges.size();
  for (std::size_t v = 0; v < un; ++v) {
    sort_unique(simple_out_[v]);
    sort_unique(simple_in_[v]);
    sort_unique(undirected_[v]);
    simple_edge_count_ += simple_out_[v].size();
    undirected_edge_count_ += undirected_[v].size();
  }
  undirected_edge_count_ /= 2;
}

Digraph Digraph::from_code_graph(const fa_ast::CodeGraph& g) {
  std::vector<std::pair<int, int>> edges;
  edges.reserve(g.edges.size());
  for (const auto& e : g.edges) edges.emplace_back(e.src, e.dst);
  return Digraph(static_cast<int>(g.nodes.size()), edges);
}

}  // namespace perfal::graph
