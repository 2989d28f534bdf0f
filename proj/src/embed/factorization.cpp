#include <Eigen/LU>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "perfal/embed.hpp"

namespace perfal::embed {

namespace {

std::string beta_message(double beta, double rho) {
  std::ostringstream ss;
  ss << "Katz series diverges: beta " << beta << " >= 1/spectral radius (" << rho << ")";
  return ss.str();
}

void normalise_signs(Svd& r) {
  for (Eigen::Index c = 0; c < r.u.cols(); ++c) {
    double sum = r.u.col(c).sum();
    if (std::abs(sum) < 1e-12) {
      for (Eigen::Index i = 0; i < r.u.rows(); ++i)
        if (std::abs(r.u(i, c)) > 1e-12) {
          sum = r.u(i, c);
          break;
        }
    }
    if (sum < 0) {
      r.u.col(c) *= -1;
      r.v.col(c) *= -1;
    }
  }
}

Svd exact_svd(const Eigen::MatrixXd& m, int k) {
  Eigen::BDCSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto avail = std::min<Eigen::Index>(k, svd.singularValues().size());
  Svd r{Eigen::MatrixXd::Zero(m.rows(), k), Eigen::VectorXd::Zero(k), Eigen::MatrixXd::Zero(m.cols(), k)};
  r.u.leftCols(avail) = svd.matrixU().leftCols(avail);
  r.s.head(avail) = svd.singularValues().head(avail);
  r.v.leftCols(avail) = svd.matrixV().leftCols(avail);
  return r;
}

// Halko-Martinsson-Tropp range finder with power iterations.
Svd randomized_svd(const Eigen::MatrixXd& m, int k, std::uint64_t seed) {
  const int oversample = 10;
  const int l = std::min<int>(k + oversample, static_cast<int>(std::min(m.rows(), m.cols())));
  Rng rng(seed);
  Eigen::MatrixXd omega(m.cols(), l);
  for (Eigen::Index j = 0; j < omega.cols(); ++j)
    for (Eigen::Index i = 0; i < omega.rows(); ++i) omega(i, j) = rng.normal();
  auto orthonormal = [](const Eigen::MatrixXd& a) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
    return Eigen::MatrixXd(qr.householderQ() * Eigen::MatrixXd::Identity(a.rows(), a.cols()));
  };
  Eigen::MatrixXd q = orthonormal(m * omega);
  for (int it = 0; it < 4; ++it) {
    q = orthonormal(m.transpose() * q);
    q = orthonormal(m * q);
  }
  Eigen::MatrixXd b = q.transpose() * m;
  Svd small = exact_svd(b, k);
  small.u = q * small.u;
  return small;
}

}  // namespace

BetaTooLarge::BetaTooLarge(double b, double rho)
    : ConfigError(beta_message(b, rho)), beta(b), spectral_radius(rho) {}

SpectralBounds spectral_radius_bounds(const Eigen::MatrixXd& a, int iterations) {
  const auto n = a.rows();
  if (n == 0) return {};
  // (A + I) shares the Perron vector and is primitive enough for the
  // quotients to tighten; both bounds hold for any positive x.
  Eigen::VectorXd x = Eigen::VectorXd::Ones(n);
  SpectralBounds b{0.0, a.rowwise().sum().maxCoeff()};
  for (int it = 0; it < iterations; ++it) {
    Eigen::VectorXd y = a * x + x;
    const Eigen::VectorXd ratio = y.cwiseQuotient(x);
    b.lower = std::max(b.lower, ratio.minCoeff() - 1.0);
    b.upper = std::min(b.upper, ratio.maxCoeff() - 1.0);
    if (b.upper - b.lower <= 1e-10 * std::max(1.0, b.upper)) break;
    x = y / y.maxCoeff();
  }
  return b;
}

Eigen::MatrixXd katz_matrix(const Eigen::MatrixXd& adjacency, double beta) {
  const auto n = adjacency.rows();
  if (adjacency.cols() != n) throw ShapeError("adjacency must be square");
  if (n == 0 || adjacency.isZero()) return Eigen::MatrixXd::Zero(n, n);
  auto b = spectral_radius_bounds(adjacency);
  if (beta * b.upper >= 1.0) {
    b = spectral_radius_bounds(adjacency, 5000);
    const double rho = beta * b.upper < 1.0 ? b.upper : 0.5 * (b.lower + b.upper);
    if (beta * rho >= 1.0) throw BetaTooLarge(beta, rho);
  }
  const Eigen::MatrixXd ba = beta * adjacency;
  const Eigen::MatrixXd lhs = Eigen::MatrixXd::Identity(n, n) - ba;
  Eigen::MatrixXd s = lhs.partialPivLu().solve(ba);
  return s.cwiseMax(0.0);  // exact result is non-negative; drop round-off
}

Svd truncated_svd(const Eigen::MatrixXd& m, int k, std::uint64_t seed) {
  if (k < 0) throw ConfigError("rank must be non-negative");
  const auto small = std::min(m.rows(), m.cols());
  Svd r = (small <= 400 || 4 * k >= small) ? exact_svd(m, k) : randomized_svd(m, k, seed);
  normalise_signs(r);
  return r;
}

Eigen::MatrixXd simple_adjacency(const fa_ast::CodeGraph& g) {
  const auto n = static_cast<Eigen::Index>(g.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (const auto& e : g.edges)
    if (e.src != e.dst) a(e.src, e.dst) = 1.0;
  return a;
}

Eigen::MatrixXd hope_fit(const Eigen::MatrixXd& adjacency, int dim, std::optional<double> beta) {
  if (dim <= 0 || dim % 2) throw ConfigError("hope needs a positive even dim");
  const auto n = adjacency.rows();
  const int half = dim / 2;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, dim);
  if (n == 0) return out;
  const double max_out = adjacency.rowwise().sum().maxCoeff();
  const double b = beta.value_or(max_out > 0 ? 0.5 / max_out : 0.5);
  const auto s = katz_matrix(adjacency, b);
  const auto svd = truncated_svd(s, half, 0x484f5045ULL);
  const Eigen::VectorXd root = svd.s.cwiseSqrt();
  out.leftCols(half) = svd.u * root.asDiagonal();
  out.rightCols(half) = svd.v * root.asDiagonal();
  return out;
}

std::vector<Eigen::MatrixXd> grarep_matrices(const Eigen::MatrixXd& adjacency, int steps) {
  if (steps < 1) throw ConfigError("grarep needs at least one step");
  const auto n = adjacency.rows();
  Eigen::MatrixXd t(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double deg = adjacency.row(i).sum();
    if (deg > 0)
      t.row(i) = adjacency.row(i) / deg;
    else
      t.row(i).setConstant(1.0 / static_cast<double>(n));
  }
  std::vector<Eigen::MatrixXd> out;
  Eigen::MatrixXd power = Eigen::MatrixXd::Identity(n, n);
  for (int k = 0; k < steps; ++k) {
    power = power * t;
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, n);
    const double scale = static_cast<double>(n);  // divide by lambda = 1/n
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = 0; i < n; ++i)
        if (power(i, j) > 0) x(i, j) = std::max(0.0, std::log(power(i, j) * scale));
    out.push_back(std::move(x));
  }
  return out;
}

Eigen::MatrixXd grarep_fit(const Eigen::MatrixXd& adjacency, int dim, int steps) {
  if (steps < 1 || dim <= 0 || dim % steps) throw ConfigError("grarep dim must be a positive multiple of steps");
  const int per = dim / steps;
  const auto mats = grarep_matrices(adjacency, steps);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(adjacency.rows(), dim);
  for (int k = 0; k < steps; ++k) {
    const auto svd = truncated_svd(mats[static_cast<std::size_t>(k)], per, 0x4752ULL + static_cast<std::uint64_t>(k));
    out.middleCols(k * per, per) = svd.u * svd.s.cwiseSqrt().asDiagonal();
  }
  return out;
}

}  // namespace perfal::embed
