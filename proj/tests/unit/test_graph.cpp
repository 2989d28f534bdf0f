#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <numeric>

#include "doctest.h"
#include "perfal/graph.hpp"
#include "graph_suite.hpp"

using namespace perfal::graph;
using testing::EdgeList;

namespace {

using namespace testing::graph_oracle;

Digraph make(int n, const EdgeList& e) { return Digraph(n, e); }

EdgeList permute(const EdgeList& e, const std::vector<int>& perm) {
  EdgeList out;
  for (auto [a, b] : e) out.emplace_back(perm[a], perm[b]);
  return out;
}

}  // namespace

TEST_SUITE("graph_core") {
  TEST_CASE("digraph keeps multiplicity and consistent reverse index") {
    const Digraph g(3, {{0, 1}, {0, 1}, {1, 2}, {2, 2}});
    CHECK(g.edge_count() == 4);
    CHECK(g.out(0).size() == 2);
    CHECK(g.simple_out(0) == std::vector<int>{1});
    CHECK(g.simple_edge_count() == 2);
    CHECK(g.undirected_edge_count() == 2);
    perfal::Rng rng(7);
    for (int trial = 0; trial < 20; ++trial) {
      const int n = 1 + static_cast<int>(rng.below(9));
      const auto e = testing::random_edges(rng, n, 0.3);
      const Digraph r(n, e);
      std::size_t in_total = 0;
      for (int v = 0; v < n; ++v) {
        in_total += r.in(v).size();
        for (int w : r.out(v)) CHECK(std::count(r.in(w).begin(), r.in(w).end(), v) >= 1);
      }
      CHECK(in_total == e.size());
    }
    CHECK_THROWS_AS(Digraph(2, {{0, 2}}), perfal::Error);
  }

  TEST_CASE("shortest paths: small cases") {
    const auto d = shortest_path_lengths(make(3, testing::cycle(3)), true);
    CHECK(d[0 * 3 + 2] == 2);
    const auto u = shortest_path_lengths(make(3, {{0, 1}, {1, 2}}), false);
    CHECK(u[0 * 3 + 2] == 2);
    const auto dir = shortest_path_lengths(make(3, {{0, 1}, {1, 2}}), true);
    CHECK(dir[2 * 3 + 0] == kUnreachable);
  }

  TEST_CASE("shortest paths match Floyd-Warshall") {
    perfal::Rng rng(11);
    for (int trial = 0; trial < 40; ++trial) {
      const int n = 1 + static_cast<int>(rng.below(8));
      const auto e = testing::random_edges(rng, n, 0.25);
      for (bool directed : {true, false}) {
        const auto got = shortest_path_lengths(make(n, e), directed);
        const auto want = floyd_warshall(dense(n, e, directed));
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) {
            const int g = got[static_cast<std::size_t>(i * n + j)];
            if (want[i][j] == kInf)
              CHECK(g == kUnreachable);
            else
              CHECK(g == static_cast<int>(want[i][j]));
          }
      }
    }
  }

  TEST_CASE("path-length and efficiency examples") {
    CHECK(characteristic_path_length(make(3, {{0, 1}, {1, 2}})) == doctest::Approx(4.0 / 3.0));
    CHECK(characteristic_path_length(make(4, testing::complete(4))) == doctest::Approx(1.0));
    CHECK(characteristic_path_length(make(1, {})) == 0.0);
    CHECK(global_efficiency(make(3, testing::complete(3))) == doctest::Approx(1.0));
    CHECK(global_efficiency(make(2, {})) == 0.0);
    CHECK(local_efficiency(make(2, {{0, 1}})) == 0.0);
  }

  TEST_CASE("assortativity examples") {
    CHECK(assortativity(make(4, testing::cycle(4))) == 0.0);
    CHECK(assortativity(make(4, {{0, 1}, {0, 2}, {0, 3}})) == doctest::Approx(-1.0));
    CHECK(assortativity(make(3, {})) == 0.0);
  }

  TEST_CASE("clustering examples") {
    auto k3 = clustering(make(3, testing::cycle(3)));
    CHECK(k3.gcc == doctest::Approx(1.0));
    CHECK(k3.transitivity == doctest::Approx(1.0));
    auto path = clustering(make(3, {{0, 1}, {1, 2}}));
    CHECK(path.gcc == 0.0);
    CHECK(path.transitivity == 0.0);
    auto empty = clustering(make(0, {}));
    CHECK(empty.gcc == 0.0);
    CHECK(empty.transitivity == 0.0);
  }

  TEST_CASE("basic metrics and tree-sim examples") {
    auto c3 = basic_metrics(make(3, testing::cycle(3)));
    CHECK(c3.density == doctest::Approx(0.5));
    CHECK(c3.nodes == 3);
    CHECK(c3.edges == 3);
    CHECK(basic_metrics(make(4, testing::complete(4))).diameter == 1);
    CHECK(basic_metrics(make(2, {{0, 1}, {0, 1}})).edges == 2);
    CHECK(tree_sim(make(4, {{0, 1}, {0, 2}, {0, 3}})) == 0.0);
    CHECK(tree_sim(make(4, testing::undirected({{0, 1}, {0, 2}, {0, 3}}))) == 0.0);
    CHECK(tree_sim(make(4, testing::complete(4))) == doctest::Approx(1.0));
    CHECK(tree_sim(make(2, {{0, 1}})) == 0.0);
  }

  TEST_CASE("centrality examples") {
    auto path = centralities(make(3, {{0, 1}, {1, 2}}), false);
    CHECK(path.betweenness[1] == doctest::Approx(1.0));
    CHECK(path.betweenness[0] == 0.0);
    auto k3 = centralities(make(3, testing::complete(3)));
    for (double p : k3.pagerank) CHECK(p == doctest::Approx(1.0 / 3.0));
  }

  TEST_CASE("metrics match brute-force oracles on random graphs") {
    perfal::Rng rng(2024);
    for (int trial = 0; trial < 60; ++trial) {
      const int n = 1 + static_cast<int>(rng.below(10));
      const auto e = testing::random_edges(rng, n, rng.uniform(0.05, 0.5));
      const auto g = make(n, e);
      const auto u = dense(n, e, false);
      const auto d = dense(n, e, true);
      CAPTURE(trial);
      CHECK(characteristic_path_length(g) == doctest::Approx(oracle_cpl(u)).epsilon(1e-9));
      CHECK(global_efficiency(g) == doctest::Approx(oracle_efficiency(u)).epsilon(1e-9));
      CHECK(local_efficiency(g) == doctest::Approx(oracle_local_efficiency(u)).epsilon(1e-9));
      CHECK(assortativity(g) == doctest::Approx(oracle_assortativity(u)).epsilon(1e-9));
      const auto c = clustering(g);
      const auto oc = oracle_clustering(u);
      CHECK(c.gcc == doctest::Approx(oc.gcc).epsilon(1e-9));
      CHECK(c.transitivity == doctest::Approx(oc.transitivity).epsilon(1e-9));

      const auto cent = centralities(g);
      const auto bc = oracle_betweenness(d);
      const auto cl = oracle_closeness(d);
      const auto pr = oracle_pagerank(d);
      for (int v = 0; v < n; ++v) {
        CHECK(cent.betweenness[v] == doctest::Approx(bc[v]).epsilon(1e-9));
        CHECK(cent.closeness[v] == doctest::Approx(cl[v]).epsilon(1e-9));
        CHECK(cent.pagerank[v] == doctest::Approx(pr[v]).epsilon(1e-7));
      }
      const auto ucent = centralities(g, false);
      const auto ubc = oracle_betweenness(u);
      for (int v = 0; v < n; ++v) CHECK(ucent.betweenness[v] == doctest::Approx(ubc[v] / 2).epsilon(1e-9));
    }
  }

  TEST_CASE("every slot matches the dense oracle on 200 small digraphs") {
    const auto r = metric_oracle_error(11, 200, 8);
    CHECK(r.graphs == 200);
    CHECK(r.all_finite);
    CHECK(r.max_error < 1e-9);
  }

  TEST_CASE("tree-sim is 0 on random trees and 1 on complete graphs") {
    const auto r = tree_sim_boundaries(17, 100, 3, 50);
    CHECK(r.tree_failures == 0);
    CHECK(r.complete_failures == 0);
  }

  TEST_CASE("manual embedding slots") {
    const auto tri = manual_embed(make(3, testing::undirected(testing::cycle(3))));
    CHECK(tri[static_cast<std::size_t>(Metric::Gcc)] == doctest::Approx(1.0));
    CHECK(tri[static_cast<std::size_t>(Metric::Transitivity)] == doctest::Approx(1.0));
    const auto tree = manual_embed(make(5, testing::undirected({{0, 1}, {0, 2}, {1, 3}, {1, 4}})));
    CHECK(tree[static_cast<std::size_t>(Metric::TreeSim)] == 0.0);
    CHECK(metric_name(Metric::CharPathLength) == "char-path-length");
    CHECK(metric_name(kMetricCount - 1) == "tree-sim");

    perfal::Rng rng(5);
    for (int trial = 0; trial < 30; ++trial) {
      const int n = 1 + static_cast<int>(rng.below(10));
      const auto e = testing::random_edges(rng, n, 0.3);
      const auto g = make(n, e);
      const auto u = dense(n, e, false);
      const auto m = manual_embed(g);
      const auto fw = floyd_warshall(u);
      double diam = 0;
      int undirected_edges = 0, simple_edges = 0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          if (fw[i][j] < kInf) diam = std::max(diam, fw[i][j]);
          undirected_edges += (i < j && u.adj[i][j]);
        }
      const auto dd = dense(n, e, true);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) simple_edges += dd.adj[i][j];
      const auto oc = oracle_clustering(u);
      const double expect_tree =
          n < 3 ? 0.0 : std::clamp((undirected_edges - (n - 1.0)) / ((n - 1.0) * (n / 2.0 - 1.0)), 0.0, 1.0);
      const std::array<double, kMetricCount> want = {
          oracle_cpl(u), oracle_efficiency(u), oracle_local_efficiency(u), oracle_assortativity(u), oc.gcc,
          oc.transitivity, static_cast<double>(n), static_cast<double>(e.size()), diam,
          n > 1 ? simple_edges / (n * (n - 1.0)) : 0.0, n ? 2.0 * simple_edges / n : 0.0, expect_tree};
      for (std::size_t s = 0; s < kMetricCount; ++s) {
        CAPTURE(metric_name(s));
        CHECK(std::isfinite(m[s]));
        CHECK(m[s] == doctest::Approx(want[s]).epsilon(1e-9));
      }
    }
  }

  TEST_CASE("metrics are invariant under relabelling") {
    perfal::Rng rng(99);
    for (int trial = 0; trial < 25; ++trial) {
      const int n = 2 + static_cast<int>(rng.below(14));
      const auto e = testing::random_edges(rng, n, 0.2);
      std::vector<int> perm(static_cast<std::size_t>(n));
      std::iota(perm.begin(), perm.end(), 0);
      rng.shuffle(perm);
      const auto a = manual_embed(make(n, e));
      const auto b = manual_embed(make(n, permute(e, perm)));
      for (std::size_t s = 0; s < kMetricCount; ++s) CHECK(a[s] == doctest::Approx(b[s]).epsilon(1e-12));
      const auto ca = centralities(make(n, e));
      const auto cb = centralities(make(n, permute(e, perm)));
      for (int v = 0; v < n; ++v) {
        CHECK(ca.betweenness[v] == doctest::Approx(cb.betweenness[perm[v]]));
        CHECK(ca.closeness[v] == doctest::Approx(cb.closeness[perm[v]]));
        CHECK(ca.pagerank[v] == doctest::Approx(cb.pagerank[perm[v]]));
      }
    }
  }

  TEST_CASE("metric bounds and structural identities") {
    perfal::Rng rng(3);
    for (int trial = 0; trial < 50; ++trial) {
      const int n = 1 + static_cast<int>(rng.below(20));
      const auto g = make(n, testing::random_edges(rng, n, rng.uniform(0.0, 0.6)));
      const auto m = manual_embed(g);
      auto in01 = [](double x) { return x >= 0.0 && x <= 1.0; };
      CHECK(in01(m[static_cast<std::size_t>(Metric::EdgeDensity)]));
      CHECK(in01(m[static_cast<std::size_t>(Metric::Gcc)]));
      CHECK(in01(m[static_cast<std::size_t>(Metric::Transitivity)]));
      CHECK(in01(m[static_cast<std::size_t>(Metric::TreeSim)]));
      CHECK(in01(m[static_cast<std::size_t>(Metric::GlobalEfficiency)]));
    }
    for (int n = 3; n <= 9; ++n) {
      for (const auto& e : {testing::cycle(n), testing::complete(n)}) {
        const auto c = clustering(make(n, e));
        CHECK(c.gcc == doctest::Approx(c.transitivity));
      }
    }
    // Connected graphs: a random spanning tree plus random extra edges.
    for (int trial = 0; trial < 30; ++trial) {
      const int n = 2 + static_cast<int>(rng.below(15));
      EdgeList e;
      for (int v = 1; v < n; ++v) e.emplace_back(static_cast<int>(rng.below(static_cast<std::uint64_t>(v))), v);
      auto extra = testing::random_edges(rng, n, 0.1, false);
      e.insert(e.end(), extra.begin(), extra.end());
      const auto m = manual_embed(make(n, e));
      CHECK(m[static_cast<std::size_t>(Metric::Diameter)] >= m[static_cast<std::size_t>(Metric::CharPathLength)]);
    }
  }
}
