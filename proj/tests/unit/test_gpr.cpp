#include <Eigen/Dense>
#include <cmath>
#include <nlohmann/json.hpp>

#include "doctest.h"
#include "gp_suite.hpp"
#include "perfal/gpr.hpp"

using namespace perfal::gpr;

namespace {

Eigen::MatrixXd column(std::initializer_list<double> v) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(v.size()), 1);
  Eigen::Index i = 0;
  for (double x : v) m(i++, 0) = x;
  return m;
}

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd r(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) r(i++) = x;
  return r;
}

FitOptions fixed(MaternKernel k) {
  FitOptions o;
  o.tune = false;
  o.kernel = k;
  return o;
}

}  // namespace

TEST_CASE("matern closed forms against the Bessel form") {
  perfal::Rng rng(3);
  for (double nu : {0.5, 1.5, 2.5})
    for (int t = 0; t < 200; ++t) {
      const MaternKernel k{rng.uniform(0.1, 5.0), rng.uniform(0.1, 3.0), nu, 0.0};
      const double r = rng.uniform(0.0, 10.0);
      CHECK(k(r) == doctest::Approx(testing::bessel_matern(k, r)).epsilon(1e-10));
    }
  for (int t = 0; t < 200; ++t) {
    const MaternKernel k{rng.uniform(0.1, 5.0), rng.uniform(0.1, 3.0), 0.5, 0.0};
    const double r = rng.uniform(0.0, 10.0);
    CHECK(std::abs(k(r) - k.signal_variance * std::exp(-r / k.length_scale)) < 1e-12);
  }
  const MaternKernel k{1.0, 2.0, 2.5, 0.3};
  CHECK(k(0.0) == 2.0);
  CHECK_THROWS_AS((MaternKernel{1.0, 1.0, 1.0, 0.0}.validate()), perfal::ConfigError);
  CHECK_THROWS_AS((MaternKernel{-1.0, 1.0, 2.5, 0.0}.validate()), perfal::ConfigError);
  CHECK_THROWS_AS((MaternKernel{1.0, 1.0, 2.5, -1e-3}.validate()), perfal::ConfigError);
}

TEST_CASE("three-point posterior matches the dense oracle") {
  const auto x = column({0.0, 1.0, 2.5});
  const auto y = vec({1.0, 3.0, 2.0});
  const MaternKernel k{1.2, 1.5, 2.5, 0.01};
  const auto m = fit(x, y, fixed(k));
  const auto xs = column({-1.0, 0.5, 1.0, 2.0, 7.0});
  const auto got = m.predict(xs);
  const auto want = testing::dense_posterior(k, x, y, xs);
  for (Eigen::Index i = 0; i < xs.rows(); ++i) {
    CHECK(std::abs(got.mean(i) - want.mean(i)) < 1e-8);
    CHECK(std::abs(got.variance(i) - want.variance(i)) < 1e-8);
  }
}

TEST_CASE("random small datasets match the dense oracle") {
  CHECK(testing::posterior_oracle_error(11, 300) < 1e-8);
}

TEST_CASE("log marginal likelihood on five points") {
  const auto x = column({0.0, 0.7, 1.9, 3.2, 4.0});
  const auto y = vec({0.3, -0.4, 1.1, 0.2, -1.0});
  for (double nu : {0.5, 1.5, 2.5}) {
    const MaternKernel k{0.9, 1.3, nu, 0.05};
    CHECK(std::abs(log_marginal_likelihood(k, x, y) - testing::dense_lml(k, x, y)) < 1e-8);
  }
  // The stored value is the same quantity on standardized targets.
  const MaternKernel k{0.9, 1.3, 2.5, 0.05};
  const auto m = fit(x, y, fixed(k));
  REQUIRE(m.jitter() == 0.0);
  const auto z = Standardizer::fit(y).forward(y);
  CHECK(std::abs(m.log_marginal_likelihood() - testing::dense_lml(k, x, z)) < 1e-8);
}

TEST_CASE("noise-free interpolation") {
  CHECK(testing::interpolation_error(5, 300) < 1e-6);
  const auto x = column({0.0, 1.0, 2.0, 4.0});
  const auto y = vec({5.0, -1.0, 2.0, 0.5});
  const auto m = fit(x, y, fixed({1.0, 1.0, 2.5, 0.0}));
  const auto p = m.predict(x);
  CHECK((p.mean - y).cwiseAbs().maxCoeff() < 1e-6);
  CHECK(p.variance.maxCoeff() < 1e-8);
}

TEST_CASE("adding a training point never raises the variance") {
  CHECK(testing::variance_increase_violations(17, 500) == 0);
}

TEST_CASE("far-field reversion to the prior") {
  const auto x = column({0.0, 0.5, 1.0, 1.5});
  const auto y = vec({2.0, 4.0, 3.0, 7.0});
  const MaternKernel k{0.5, 1.7, 1.5, 0.2};
  const auto m = fit(x, y, fixed(k));
  const auto p = m.predict(column({1e4}));
  CHECK(p.mean(0) == doctest::Approx(y.mean()).epsilon(1e-12));
  CHECK(p.variance(0) == doctest::Approx(1.9).epsilon(1e-12));
  // Variance at training inputs sits below the far-field limit.
  CHECK((m.predict(x).variance.array() <= 1.9).all());
}

TEST_CASE("constant targets") {
  const auto x = column({0.0, 1.0, 2.0, 3.0, 4.0});
  const Eigen::VectorXd y = Eigen::VectorXd::Constant(5, 42.0);
  const auto m = fit(x, y, FitOptions{});
  CHECK(m.kernel().signal_variance < 1e-8);
  const auto p = m.predict(column({-3.0, 0.5, 2.2, 100.0}));
  for (Eigen::Index i = 0; i < p.mean.size(); ++i) CHECK(p.mean(i) == doctest::Approx(42.0).epsilon(1e-12));
}

TEST_CASE("standardization round trip") {
  perfal::Rng rng(8);
  for (int t = 0; t < 100; ++t) {
    Eigen::VectorXd y(2 + static_cast<Eigen::Index>(rng.below(20)));
    for (auto& v : y) v = rng.normal() * 1e3 + 50;
    const auto s = Standardizer::fit(y);
    CHECK((s.inverse(s.forward(y)) - y).cwiseAbs().maxCoeff() < 1e-12 * y.cwiseAbs().maxCoeff());
    const auto z = s.forward(y);
    CHECK(std::abs(z.mean()) < 1e-12);
    CHECK(std::abs(z.squaredNorm() / static_cast<double>(z.size()) - 1.0) < 1e-12);
  }
}

TEST_CASE("cholesky reconstructs the noisy kernel matrix") {
  perfal::Rng rng(21);
  for (int t = 0; t < 20; ++t) {
    const Eigen::Index n = 5 + static_cast<Eigen::Index>(rng.below(40));
    Eigen::MatrixXd x(n, 3);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (int c = 0; c < 3; ++c) x(i, c) = rng.normal();
      y(i) = x.row(i).sum() + 0.1 * rng.normal();
    }
    FitOptions opt;
    opt.seed = static_cast<std::uint64_t>(t);
    const auto m = fit(x, y, opt);
    const auto& k = m.kernel();
    CHECK(k.length_scale >= 1e-2);
    CHECK(k.length_scale <= 1e3);
    Eigen::MatrixXd want = testing::dense_kernel(k, x, x);
    want.diagonal().array() += k.noise_variance + m.jitter();
    const auto l = m.cholesky();
    CHECK((l * l.transpose() - want).norm() / want.norm() < 1e-8);
    CHECK((m.predict(x).variance.array() >= 0).all());
  }
}

TEST_CASE("tuning improves on its starting points and is seeded") {
  perfal::Rng rng(4);
  const Eigen::Index n = 40;
  Eigen::MatrixXd x(n, 2);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x(i, 0) = rng.uniform(-3, 3);
    x(i, 1) = rng.uniform(-3, 3);
    y(i) = std::sin(x(i, 0)) + 0.5 * x(i, 1) + 0.05 * rng.normal();
  }
  FitOptions opt;
  opt.seed = 99;
  const auto m = fit(x, y, opt);
  const auto z = Standardizer::fit(y).forward(y);
  for (double ls : {0.1, 0.5, 1.0, 3.0, 30.0})
    for (double noise : {1e-4, 1e-2, 0.3})
      for (double sig : {0.3, 1.0, 3.0})
        CHECK(m.log_marginal_likelihood() >= testing::dense_lml({ls, sig, 2.5, noise * sig}, x, z) - 1e-6);
  // Smooth signal with little noise: the tuned noise is small relative to the signal.
  CHECK(m.kernel().noise_variance < 0.1 * m.kernel().signal_variance);
  const auto again = fit(x, y, opt);
  CHECK(again.kernel().length_scale == m.kernel().length_scale);
  CHECK(again.kernel().noise_variance == m.kernel().noise_variance);
}

TEST_CASE("duplicate inputs are absorbed by jitter") {
  const auto x = column({1.0, 1.0, 2.0});
  const auto y = vec({1.0, 1.2, 0.0});
  const auto m = fit(x, y, fixed({1.0, 1.0, 2.5, 0.0}));
  CHECK(m.jitter() > 0);
  CHECK(m.jitter() <= 1e-2);
  CHECK(std::abs(m.predict(column({1.0})).mean(0) - 1.1) < 1e-3);
}

TEST_CASE("shape errors") {
  const auto x = column({0.0, 1.0, 2.0});
  const auto y = vec({1.0, 2.0, 3.0});
  CHECK_THROWS_AS(fit(column({0.0}), vec({1.0}), FitOptions{}), perfal::ShapeError);
  CHECK_THROWS_AS(fit(x, vec({1.0, 2.0}), FitOptions{}), perfal::ShapeError);
  Eigen::MatrixXd bad = x;
  bad(1, 0) = std::nan("");
  CHECK_THROWS_AS(fit(bad, y, FitOptions{}), perfal::ShapeError);
  const auto m = fit(x, y, fixed({1.0, 1.0, 2.5, 0.1}));
  CHECK_THROWS_AS(m.predict(Eigen::MatrixXd::Zero(2, 2)), perfal::ShapeError);
}

TEST_CASE("model dump") {
  const auto m = fit(column({0.0, 1.0, 3.0}), vec({2.0, 4.0, 9.0}), fixed({1.5, 2.0, 1.5, 0.1}));
  const auto j = nlohmann::json::parse(m.dump_json({"a", "b", "c"}));
  CHECK(j["kernel"]["nu"] == 1.5);
  CHECK(j["kernel"]["length_scale"] == 1.5);
  CHECK(j["target_mean"] == doctest::Approx(5.0));
  CHECK(j["training_ids"].size() == 3);
  CHECK(!j.contains("inputs"));
}

TEST_CASE("pearson") {
  const auto a = vec({1, 2, 3, 4, 5, 6});
  CHECK(pearson(a, a).r == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(pearson(a, (-a).array() + 7.0).r == doctest::Approx(-1.0).epsilon(1e-15));
  // sum of products 14.5 over sqrt(17.5 * 17.5)
  CHECK(pearson(a, vec({2, 1, 4, 3, 6, 5})).r == doctest::Approx(29.0 / 35.0).epsilon(1e-14));
  const auto flat = pearson(a, Eigen::VectorXd::Constant(6, 0.1 * 3));
  CHECK(flat.degenerate);
  CHECK(flat.r == 0.0);
  CHECK(!pearson(a, vec({2, 1, 4, 3, 6, 5})).degenerate);
  CHECK_THROWS_AS(pearson(a, vec({1, 2})), perfal::ShapeError);

  perfal::Rng rng(12);
  for (int t = 0; t < 200; ++t) {
    Eigen::VectorXd u(3 + static_cast<Eigen::Index>(rng.below(30))), v(u.size());
    for (Eigen::Index i = 0; i < u.size(); ++i) {
      u(i) = rng.normal();
      v(i) = u(i) + rng.normal();
    }
    const double r = pearson(u, v).r;
    CHECK(r <= 1.0);
    CHECK(r >= -1.0);
    const double s = rng.uniform(0.01, 100.0), c = rng.uniform(-50.0, 50.0);
    CHECK(pearson((u.array() * s + c).matrix(), v).r == doctest::Approx(r).epsilon(1e-10));
    CHECK(pearson(u, (v.array() * s + c).matrix()).r == doctest::Approx(r).epsilon(1e-10));
  }
}
