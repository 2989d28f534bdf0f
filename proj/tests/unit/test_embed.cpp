#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <set>

#include "doctest.h"
#include "fixture_suite.hpp"
#include "perfal/embed.hpp"
#include "perfal/fa_ast.hpp"

using namespace perfal::embed;
using perfal::fa_ast::CodeGraph;
using perfal::fa_ast::EdgeKind;

namespace {

const std::filesystem::path kFixtures = PERFAL_FIXTURES;

CodeGraph labelled_graph(const std::vector<std::string>& tokens, const std::vector<std::pair<int, int>>& edges) {
  CodeGraph g;
  for (std::size_t i = 0; i < tokens.size(); ++i)
    g.nodes.push_back({static_cast<int>(i), "Identifier", tokens[i], std::nullopt});
  for (auto [a, b] : edges) g.edges.push_back({a, b, EdgeKind::NextToken});
  return g;
}

CodeGraph random_graph(perfal::Rng& rng, int n, double p, int alphabet) {
  std::vector<std::string> tokens;
  for (int i = 0; i < n; ++i) tokens.push_back("t" + std::to_string(rng.below(static_cast<std::uint64_t>(alphabet))));
  std::vector<std::pair<int, int>> edges;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      if (a != b && rng.uniform() < p) edges.emplace_back(a, b);
  return labelled_graph(tokens, edges);
}

// Structural WL labels spelled out as strings.
std::vector<std::vector<std::string>> string_wl(const CodeGraph& g, int iterations) {
  std::vector<std::set<int>> adj(g.size());
  for (const auto& e : g.edges)
    if (e.src != e.dst) adj[e.src].insert(e.dst);
  std::vector<std::vector<std::string>> out(1);
  for (const auto& n : g.nodes) out[0].push_back(n.kind + "/" + n.token.value_or("-"));
  for (int it = 0; it < iterations; ++it) {
    const auto& prev = out.back();
    std::vector<std::string> next;
    for (std::size_t v = 0; v < g.size(); ++v) {
      std::vector<std::string> nb;
      for (int w : adj[v]) nb.push_back(prev[w]);
      std::sort(nb.begin(), nb.end());
      std::string s = prev[v] + "(";
      for (const auto& x : nb) s += x + ",";
      next.push_back(s + ")");
    }
    out.push_back(next);
  }
  return out;
}

double cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return a.dot(b) / (a.norm() * b.norm()); }

// Katz similarity summed as a power series; an independent oracle for the LU solve.
Eigen::MatrixXd katz_series(const Eigen::MatrixXd& a, double beta) {
  Eigen::MatrixXd term = beta * a, total = Eigen::MatrixXd::Zero(a.rows(), a.cols());
  for (int k = 0; k < 2000 && term.norm() > 1e-18; ++k) {
    total += term;
    term = term * (beta * a);
  }
  return total;
}

std::vector<CodeGraph> fixture_corpus() {
  std::vector<CodeGraph> out;
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(kFixtures / "java")) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  for (const auto& f : files) out.push_back(perfal::fa_ast::build_file_graph(testing::read_file(f), f.filename().string()));
  return out;
}

}  // namespace

TEST_SUITE("embed") {
  TEST_CASE("WL: single node") {
    const auto labels = wl_relabel(labelled_graph({"x"}, {}), 2);
    REQUIRE(labels.size() == 3);
    for (const auto& l : labels) CHECK(l.size() == 1);
    CHECK_THROWS_AS(wl_relabel(labelled_graph({"x"}, {}), -1), perfal::ConfigError);
  }

  TEST_CASE("WL labels induce the same partition as structural strings") {
    // Directed path a -> b -> c with equal labels: a and b merge after one round only.
    const auto path = labelled_graph({"x", "x", "x"}, {{0, 1}, {1, 2}});
    const auto l = wl_relabel(path, 2);
    CHECK(l[1][0] == l[1][1]);
    CHECK(l[1][1] != l[1][2]);
    CHECK(l[2][0] != l[2][1]);

    perfal::Rng rng(4);
    for (int trial = 0; trial < 40; ++trial) {
      const auto g = random_graph(rng, 1 + static_cast<int>(rng.below(9)), 0.25, 2);
      const auto hashed = wl_relabel(g, 3);
      const auto strings = string_wl(g, 3);
      for (std::size_t it = 0; it < hashed.size(); ++it)
        for (std::size_t a = 0; a < g.size(); ++a)
          for (std::size_t b = 0; b < g.size(); ++b)
            CHECK((hashed[it][a] == hashed[it][b]) == (strings[it][a] == strings[it][b]));
    }
  }

  TEST_CASE("WL features are invariant under relabelling") {
    perfal::Rng rng(8);
    for (int trial = 0; trial < 30; ++trial) {
      const auto g = random_graph(rng, 2 + static_cast<int>(rng.below(12)), 0.2, 3);
      std::vector<int> perm(g.size());
      std::iota(perm.begin(), perm.end(), 0);
      rng.shuffle(perm);
      CodeGraph h;
      h.nodes.resize(g.size());
      for (std::size_t v = 0; v < g.size(); ++v) {
        h.nodes[perm[v]] = g.nodes[v];
        h.nodes[perm[v]].id = perm[v];
      }
      for (const auto& e : g.edges) h.edges.push_back({perm[e.src], perm[e.dst], e.kind});
      auto a = wl_features(g, 3), b = wl_features(h, 3);
      std::sort(a.begin(), a.end());
      std::sort(b.begin(), b.end());
      CHECK(a == b);
    }
  }

  TEST_CASE("graph2vec: clones are nearest neighbours") {
    auto corpus = fixture_corpus();
    corpus.resize(9);
    corpus.push_back(corpus[4]);  // clone of the fifth graph
    std::vector<const CodeGraph*> ptrs;
    for (const auto& g : corpus) ptrs.push_back(&g);
    EmbeddingConfig cfg;
    cfg.dim = 32;
    cfg.min_count = 1;
    const auto rows = graph2vec_fit(ptrs, cfg, 3);
    CHECK(rows.rows() == 10);
    CHECK(rows.cols() == 32);
    CHECK(rows.allFinite());
    double best = -2;
    std::pair<int, int> best_pair;
    for (int a = 0; a < 10; ++a)
      for (int b = a + 1; b < 10; ++b) {
        const double c = cosine(rows.row(a), rows.row(b));
        if (c > best) {
          best = c;
          best_pair = {a, b};
        }
      }
    CHECK(best_pair == std::pair<int, int>{4, 9});
    CHECK(graph2vec_fit(ptrs, cfg, 3) == rows);
    CHECK(graph2vec_fit(ptrs, cfg, 4) != rows);
  }

  TEST_CASE("walks: trivial shapes") {
    const auto single = random_walks(Adjacency{{}}, 3, 10, 1, 1, 1);
    REQUIRE(single.size() == 3);
    for (const auto& w : single) CHECK(w == std::vector<int>{0});
    const auto cycle = random_walks(Adjacency{{1}, {0}}, 1, 4, 0.5, 2.0, 1);
    CHECK(cycle[0] == std::vector<int>{0, 1, 0, 1});
    CHECK(cycle[1] == std::vector<int>{1, 0, 1, 0});
    CHECK_THROWS_AS(random_walks(Adjacency{{}}, 1, 0, 1, 1, 1), perfal::ConfigError);
  }

  TEST_CASE("node2vec transition frequencies follow the bias weights") {
    // 0 <-> 1, 1 -> 2, 1 -> 3, 1 -> 4, 0 -> 2, every node returns to 1 or 0.
    const Adjacency adj{{1, 2}, {0, 2, 3, 4}, {0, 1}, {1}, {1}};
    const double p = 1.0, q = 0.25;
    const auto walks = random_walks(adj, 8000, 40, p, q, 99);
    // Steps taken from 1 when the previous node was 0.
    std::map<int, double> counts;
    double total = 0;
    for (const auto& w : walks)
      for (std::size_t i = 2; i < w.size(); ++i)
        if (w[i - 2] == 0 && w[i - 1] == 1) {
          counts[w[i]] += 1;
          total += 1;
        }
    REQUIRE(total > 100000);
    // From t=0 at v=1: x=0 returns (1/p), x=2 is adjacent to 0 (1), x=3,4 are not (1/q).
    const std::map<int, double> weight{{0, 1 / p}, {2, 1.0}, {3, 1 / q}, {4, 1 / q}};
    double z = 0;
    for (auto [x, w] : weight) z += w;
    for (auto [x, w] : weight) CHECK(std::abs(counts[x] / total - w / z) < 0.02);
  }

  TEST_CASE("uniform walks pass a chi-square test") {
    const Adjacency adj{{1, 2, 3}, {0, 2}, {0, 1, 3}, {0}};
    const auto walks = random_walks(adj, 3000, 20, 1, 1, 5);
    std::map<std::pair<int, int>, double> counts;
    std::vector<double> from(4, 0);
    for (const auto& w : walks)
      for (std::size_t i = 1; i < w.size(); ++i) {
        counts[{w[i - 1], w[i]}] += 1;
        from[w[i - 1]] += 1;
      }
    double chi = 0;
    int dof = 0;
    for (int v = 0; v < 4; ++v) {
      for (int x : adj[v]) {
        const double expect = from[v] / adj[v].size();
        chi += std::pow(counts[{v, x}] - expect, 2) / expect;
      }
      dof += static_cast<int>(adj[v].size()) - 1;
    }
    // 99.9% quantile of chi-square with 5 degrees of freedom is 20.5.
    CHECK(dof == 5);
    CHECK(chi < 20.5);
  }

  TEST_CASE("skip-gram: zero epochs return the seeded initialisation") {
    SkipGramOptions opt;
    opt.dim = 4;
    opt.epochs = 0;
    opt.seed = 21;
    const auto r = skipgram_fit({{0, 1, 2}}, 3, opt);
    perfal::Rng rng(21);
    for (int row = 0; row < 3; ++row)
      for (int c = 0; c < 4; ++c)
        CHECK(r.vectors(row, c) == doctest::Approx(static_cast<float>(rng.uniform(-0.125, 0.125))).epsilon(1e-7));
    CHECK(r.epoch_loss.empty());
  }

  TEST_CASE("skip-gram: planted co-occurrence and decreasing loss") {
    std::vector<std::vector<int>> seqs;
    for (int i = 0; i < 200; ++i) {
      seqs.push_back({0, 1, 0, 1, 0, 1});
      seqs.push_back({2, 3, 4, 2, 3, 4});
    }
    SkipGramOptions opt;
    opt.dim = 16;
    opt.window = 2;
    opt.epochs = 8;
    opt.seed = 2;
    const auto r = skipgram_fit(seqs, 5, opt);
    const Eigen::VectorXd u = r.vectors.row(0), v = r.vectors.row(1), w = r.vectors.row(2);
    CHECK(u.dot(v) > u.dot(w));
    REQUIRE(r.epoch_loss.size() == 8);
    CHECK(r.epoch_loss.back() < r.epoch_loss.front());
    CHECK(skipgram_fit(seqs, 5, opt).vectors == r.vectors);
    CHECK_THROWS_AS(skipgram_fit({{0, 7}}, 5, opt), perfal::ShapeError);
  }

  TEST_CASE("HOPE") {
    CHECK(hope_fit(Eigen::MatrixXd::Zero(3, 3), 4, std::nullopt).isZero());

    Eigen::MatrixXd chain = Eigen::MatrixXd::Zero(3, 3);
    chain(0, 1) = chain(1, 2) = 1;
    const auto s = katz_series(chain, 0.1);
    CHECK((katz_matrix(chain, 0.1) - s).cwiseAbs().maxCoeff() < 1e-12);
    const auto e = hope_fit(chain, 6, 0.1);
    const Eigen::MatrixXd rec = e.leftCols(3) * e.rightCols(3).transpose();
    CHECK((rec - s).cwiseAbs().maxCoeff() < 1e-8);

    Eigen::MatrixXd two = Eigen::MatrixXd::Zero(2, 2);
    two(0, 1) = two(1, 0) = 1;
    CHECK_THROWS_AS(katz_matrix(two, 1.5), BetaTooLarge);
    CHECK_THROWS_AS(katz_matrix(two, 1.0), BetaTooLarge);
    CHECK_NOTHROW(katz_matrix(two, 0.9));

    perfal::Rng rng(6);
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(10, 10);
    for (int i = 0; i < 10; ++i)
      for (int j = 0; j < 10; ++j)
        if (i != j && rng.uniform() < 0.3) a(i, j) = 1;
    const auto katz = katz_matrix(a, 0.5 / a.rowwise().sum().maxCoeff());
    CHECK(katz.minCoeff() >= 0.0);
    CHECK((katz - katz_series(a, 0.5 / a.rowwise().sum().maxCoeff())).cwiseAbs().maxCoeff() < 1e-10);
    double prev = 1e300;
    for (int d = 2; d <= 20; d += 2) {
      const auto h = hope_fit(a, d, std::nullopt);
      const double err = (h.leftCols(d / 2) * h.rightCols(d / 2).transpose() - katz).norm();
      CHECK(err <= prev + 1e-12);
      prev = err;
      // Any rank-d/2 projection onto a random subspace does no better.
      Eigen::MatrixXd g(10, d / 2);
      for (int i = 0; i < g.size(); ++i) g.data()[i] = rng.normal();
      Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
      const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(10, d / 2);
      CHECK(err <= (q * q.transpose() * katz - katz).norm() + 1e-12);
    }
  }

  TEST_CASE("spectral radius bounds bracket the true value") {
    perfal::Rng rng(12);
    for (int trial = 0; trial < 20; ++trial) {
      const int n = 2 + static_cast<int>(rng.below(8));
      Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          if (i != j && rng.uniform() < 0.4) a(i, j) = 1;
      const double rho = Eigen::EigenSolver<Eigen::MatrixXd>(a).eigenvalues().cwiseAbs().maxCoeff();
      const auto b = spectral_radius_bounds(a, 2000);
      CHECK(b.lower <= rho + 1e-9);
      CHECK(b.upper >= rho - 1e-9);
    }
  }

  TEST_CASE("GraRep") {
    Eigen::MatrixXd two = Eigen::MatrixXd::Zero(2, 2);
    two(0, 1) = two(1, 0) = 1;
    const auto e = grarep_fit(two, 2, 1);
    CHECK(e.row(0).norm() == doctest::Approx(e.row(1).norm()));
    CHECK(e.cols() == 2);

    perfal::Rng rng(14);
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(6, 6);
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j)
        if (i != j && rng.uniform() < 0.35) a(i, j) = 1;
    a.row(5).setZero();  // isolated source row gets a uniform transition
    const auto mats = grarep_matrices(a, 3);
    REQUIRE(mats.size() == 3);
    for (const auto& x : mats) {
      CHECK(x.allFinite());
      CHECK(x.minCoeff() >= 0);
      const int r = 2;
      const auto svd = truncated_svd(x, r, 1);
      const Eigen::MatrixXd rec = svd.u * svd.s.asDiagonal() * svd.v.transpose();
      const Eigen::VectorXd sigma = Eigen::JacobiSVD<Eigen::MatrixXd>(x).singularValues();
      const double optimal = sigma.tail(sigma.size() - r).norm();
      CHECK((x - rec).norm() == doctest::Approx(optimal).epsilon(1e-9));
    }
    // Uniform row for the isolated node: step-1 entries are log(1/6 * 6) = 0.
    CHECK(mats[0].row(5).isZero());
    CHECK(grarep_fit(a, 12, 3).cols() == 12);
    CHECK_THROWS_AS(grarep_fit(a, 10, 3), perfal::ConfigError);
  }

  TEST_CASE("truncated SVD pads beyond the rank and fixes signs") {
    Eigen::MatrixXd m(3, 2);
    m << 1, 2, 3, 4, 5, 6;
    const auto r = truncated_svd(m, 4, 0);
    CHECK(r.u.cols() == 4);
    CHECK(r.s(2) == 0.0);
    CHECK(r.s(3) == 0.0);
    for (int c = 0; c < 2; ++c) CHECK(r.u.col(c).sum() >= 0);
    // The randomized path agrees with the exact one on a low-rank matrix.
    perfal::Rng rng(3);
    Eigen::MatrixXd l(600, 5), rr(5, 600);
    for (int i = 0; i < l.size(); ++i) l.data()[i] = rng.normal();
    for (int i = 0; i < rr.size(); ++i) rr.data()[i] = rng.normal();
    const Eigen::MatrixXd big = l * rr;
    const auto fast = truncated_svd(big, 5, 9);
    const Eigen::VectorXd exact = Eigen::BDCSVD<Eigen::MatrixXd>(big).singularValues().head(5);
    CHECK((fast.s - exact).cwiseAbs().maxCoeff() < 1e-8 * exact(0));
  }

  TEST_CASE("aggregation") {
    Eigen::MatrixXd one(1, 3);
    one << 1, -2, 3;
    CHECK(aggregate(one, Aggregation::Mean) == one.row(0).transpose());
    CHECK(aggregate(one, Aggregation::Sum) == one.row(0).transpose());
    Eigen::MatrixXd same = one.replicate(4, 1);
    CHECK(aggregate(same, Aggregation::Mean).isApprox(one.row(0).transpose()));
    CHECK(aggregate(same, Aggregation::Sum).isApprox(4 * one.row(0).transpose()));
    CHECK(aggregate(Eigen::MatrixXd(0, 3), Aggregation::Mean).isZero());
    perfal::Rng rng(1);
    Eigen::MatrixXd x(7, 5);
    for (int i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
    const auto s = aggregate(x, Aggregation::Sum);
    for (int c = 0; c < 5; ++c) {
      double naive = 0;
      for (int r = 0; r < 7; ++r) naive += x(r, c);
      CHECK(s(c) == doctest::Approx(naive));
    }
    CHECK_THROWS_AS(aggregate(x, Aggregation::None), perfal::ConfigError);
  }

  TEST_CASE("config validation and JSON round trip") {
    EmbeddingConfig c;
    c.method = Method::Graph2Vec;
    c.scope = Scope::TrainUnlabeled;
    CHECK_THROWS_AS(c.validate(), perfal::ConfigError);
    c.scope = Scope::SplitSpace;
    CHECK_NOTHROW(c.validate());
    c.aggregation = Aggregation::Mean;
    CHECK_THROWS_AS(c.validate(), perfal::ConfigError);
    c.method = Method::DeepWalk;
    CHECK_NOTHROW(c.validate());
    c.aggregation = Aggregation::None;
    CHECK_THROWS_AS(c.validate(), perfal::ConfigError);
    CHECK_THROWS_AS(parse_method("gnn"), perfal::ConfigError);

    EmbeddingConfig h;
    h.method = Method::Hope;
    h.aggregation = Aggregation::Sum;
    h.dim = 16;
    h.beta = 0.05;
    h.seed = 77;
    const auto back = config_from_json(config_to_json(h));
    CHECK(config_to_json(back) == config_to_json(h));
    CHECK(back.beta == 0.05);
    const auto d = config_from_json(R"({"method": "grarep", "dim": 8})");
    CHECK(d.aggregation == Aggregation::Mean);
    CHECK_THROWS_AS(config_from_json("[1]"), perfal::ConfigError);
  }

  TEST_CASE("embed_corpus scopes") {
    const auto corpus = fixture_corpus();
    const auto n = static_cast<int>(corpus.size());
    Split split;
    for (int i = 0; i < n; ++i) (i % 5 == 0 ? split.test : i % 2 ? split.labeled : split.unlabeled).push_back(i);

    EmbeddingConfig manual;
    manual.method = Method::Manual;
    const auto m1 = embed_corpus(corpus, split, manual);
    manual.scope = Scope::TrainUnlabeled;
    const auto m2 = embed_corpus(corpus, {}, manual);
    manual.scope = Scope::SplitSpace;
    const auto m3 = embed_corpus(corpus, split, manual);
    CHECK(m1.rows == m2.rows);
    CHECK(m1.rows == m3.rows);
    CHECK(m1.rows.cols() == 12);

    EmbeddingConfig g2v;
    g2v.dim = 16;
    g2v.min_count = 1;
    g2v.g2v_epochs = 10;
    g2v.scope = Scope::SplitSpace;
    const auto s = embed_corpus(corpus, split, g2v);
    for (int i = 0; i < n; ++i) CHECK(s.space[i] == (i % 5 == 0 ? 1 : 0));
    CHECK(s.rows.allFinite());
    CHECK(embed_corpus(corpus, split, g2v).rows == s.rows);
    Split broken = split;
    broken.test.pop_back();
    CHECK_THROWS_AS(embed_corpus(corpus, broken, g2v), perfal::ConfigError);

    for (auto method : {Method::DeepWalk, Method::Node2Vec, Method::Hope, Method::GraRep}) {
      EmbeddingConfig c;
      c.method = method;
      c.aggregation = Aggregation::Mean;
      c.dim = 8;
      c.walks_per_node = 2;
      c.walk_length = 10;
      c.walk_epochs = 1;
      c.q = 0.5;
      c.scope = Scope::SplitSpace;
      CAPTURE(method_name(method));
      const auto e = embed_corpus(corpus, split, c);
      CHECK(e.rows.rows() == n);
      CHECK(e.rows.cols() == 8);
      CHECK(e.rows.allFinite());
      CHECK(embed_corpus(corpus, split, c).rows == e.rows);
    }
  }

  TEST_CASE("embedding persistence") {
    const auto corpus = fixture_corpus();
    EmbeddingConfig c;
    c.method = Method::Manual;
    auto m = embed_corpus(corpus, {}, c);
    m.space[2] = 1;
    std::vector<std::string> ids;
    for (const auto& g : corpus) ids.push_back(g.path);
    const auto path = (std::filesystem::temp_directory_path() / "perfal_embed_test.csv").string();
    save_embedding(m, ids, path);
    std::vector<std::string> back_ids;
    const auto back = load_embedding(path, &back_ids);
    CHECK(back_ids == ids);
    CHECK(back.rows == m.rows);
    CHECK(back.space == m.space);
    CHECK(back.config.method == Method::Manual);
    std::filesystem::remove(path);
    std::filesystem::remove(path + ".json");
  }
}
