#include "perfal/gpr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <nlohmann/json.hpp>

namespace perfal::gpr {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;
constexpr double kMinSignal = 1e-10;

// Cholesky of m + jitter I; jitter starts at 0 and escalates 1e-8, 1e-7, ... 1e-2.
bool robust_cholesky(const Eigen::MatrixXd& m, Eigen::LLT<Eigen::MatrixXd>& llt, double& jitter) {
  jitter = 0.0;
  llt.compute(m);
  if (llt.info() == Eigen::Success) return true;
  const auto n = m.rows();
  for (double j = 1e-8; j <= 1e-2 * (1 + 1e-9); j *= 10) {
    llt.compute(m + j * Eigen::MatrixXd::Identity(n, n));
    if (llt.info() == Eigen::Success) {
      jitter = j;
      return true;
    }
  }
  return false;
}

double log_det(const Eigen::LLT<Eigen::MatrixXd>& llt) {
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

void check_finite(const Eigen::MatrixXd& x, const char* what) {
  if (!x.allFinite()) throw ShapeError(std::string(what) + " contains non-finite values");
}

double median_distance(const Eigen::MatrixXd& d) {
  std::vector<double> vals;
  for (Eigen::Index i = 0; i < d.rows(); ++i)
    for (Eigen::Index j = i + 1; j < d.cols(); ++j)
      if (d(i, j) > 0) vals.push_back(d(i, j));
  if (vals.empty()) return 1.0;
  auto mid = vals.begin() + static_cast<std::ptrdiff_t>(vals.size() / 2);
  std::nth_element(vals.begin(), mid, vals.end());
  return *mid;
}

// Log marginal likelihood with the signal variance at its maximiser
// s2 = y^T (R + g I)^-1 y / n, where R is the unit-variance kernel matrix.
struct ProfiledLml {
  const Eigen::MatrixXd& dist;
  const Eigen::VectorXd& y;
  double nu;

  struct Result {
    double lml = -std::numeric_limits<double>::infinity();
    double signal = kMinSignal;
  };

  Result operator()(double length_scale, double ratio) const {
    const MaternKernel unit{length_scale, 1.0, nu, 0.0};
    Eigen::MatrixXd r = kernel_matrix(unit, dist);
    r.diagonal().array() += ratio;
    Eigen::LLT<Eigen::MatrixXd> llt;
    double jitter = 0.0;
    Result out;
    if (!robust_cholesky(r, llt, jitter)) return out;
    const double n = static_cast<double>(y.size());
    const double quad = y.dot(llt.solve(y));
    out.signal = std::max(quad / n, kMinSignal);
    out.lml = -0.5 * quad / out.signal - 0.5 * n * std::log(out.signal) - 0.5 * log_det(llt) - 0.5 * n * kLog2Pi;
    return out;
  }
};

MaternKernel tune(const Eigen::MatrixXd& dist, const Eigen::VectorXd& y, const FitOptions& opt) {
  const ProfiledLml objective{dist, y, opt.kernel.nu};
  const double lo[2] = {std::log(opt.min_length_scale), std::log(opt.min_noise)};
  const double hi[2] = {std::log(opt.max_length_scale), std::log(opt.max_noise)};
  auto clamp = [&](int c, double v) { return std::clamp(v, lo[c], hi[c]); };

  Rng rng(opt.seed);
  double best_lml = -std::numeric_limits<double>::infinity();
  double best[2] = {0.0, std::log(1e-2)};
  double best_signal = 1.0;

  const int restarts = std::max(1, opt.restarts);
  for (int s = 0; s < restarts; ++s) {
    double theta[2];
    if (s == 0) {
      theta[0] = clamp(0, std::log(median_distance(dist)));
      theta[1] = clamp(1, std::log(1e-2));
    } else {
      theta[0] = rng.uniform(lo[0], hi[0]);
      theta[1] = rng.uniform(lo[1], hi[1]);
    }
    auto cur = objective(std::exp(theta[0]), std::exp(theta[1]));
    double step = 1.0;
    int evals = 1;
    while (step >= 0.05 && evals < 80) {
      bool moved = false;
      for (int c = 0; c < 2; ++c) {
        for (double dir : {1.0, -1.0}) {
          double cand[2] = {theta[0], theta[1]};
          cand[c] = clamp(c, theta[c] + dir * step);
          if (cand[c] == theta[c]) continue;
          const auto r = objective(std::exp(cand[0]), std::exp(cand[1]));
          ++evals;
          if (r.lml > cur.lml) {
            theta[c] = cand[c];
            cur = r;
            moved = true;
            break;
          }
        }
      }
      if (!moved) step *= 0.5;
    }
    if (cur.lml > best_lml) {
      best_lml = cur.lml;
      best[0] = theta[0];
      best[1] = theta[1];
      best_signal = cur.signal;
    }
  }
  if (!std::isfinite(best_lml)) throw SingularKernel("kernel matrix is singular for every tuning candidate");
  return MaternKernel{std::exp(best[0]), best_signal, opt.kernel.nu, best_signal * std::exp(best[1])};
}

}  // namespace

double MaternKernel::operator()(double r) const {
  const double t = r / length_scale;
  if (nu == 0.5) return signal_variance * std::exp(-t);
  if (nu == 1.5) {
    const double a = std::sqrt(3.0) * t;
    return signal_variance * (1.0 + a) * std::exp(-a);
  }
  const double a = std::sqrt(5.0) * t;
  return signal_variance * (1.0 + a + a * a / 3.0) * std::exp(-a);
}

void MaternKernel::validate() const {
  if (!(length_scale > 0) || !std::isfinite(length_scale)) throw ConfigError("length-scale must be positive");
  if (!(signal_variance > 0) || !std::isfinite(signal_variance)) throw ConfigError("signal variance must be positive");
  if (!(noise_variance >= 0) || !std::isfinite(noise_variance)) throw ConfigError("noise variance must be >= 0");
  if (nu != 0.5 && nu != 1.5 && nu != 2.5) throw ConfigError("nu must be 0.5, 1.5 or 2.5");
}

Eigen::MatrixXd pairwise_distances(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.cols() != b.cols()) throw ShapeError("distance operands have different column counts");
  Eigen::MatrixXd d(a.rows(), b.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < b.rows(); ++j) d(i, j) = (a.row(i) - b.row(j)).norm();
  return d;
}

Eigen::MatrixXd kernel_matrix(const MaternKernel& k, const Eigen::MatrixXd& distances) {
  return distances.unaryExpr([&](double r) { return k(r); });
}

Standardizer Standardizer::fit(const Eigen::VectorXd& y) {
  Standardizer s;
  if (y.size() == 0) return s;
  s.mean = y.mean();
  const double var = (y.array() - s.mean).square().mean();
  const double sd = std::sqrt(var);
  s.scale = sd > 1e-12 * std::max(1.0, std::abs(s.mean)) ? sd : 1.0;
  return s;
}

GprModel fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const FitOptions& options) {
  if (x.rows() < 2) throw ShapeError("GP fit needs at least two rows");
  if (x.rows() != y.size()) throw ShapeError("GP fit: row count differs from target count");
  check_finite(x, "GP inputs");
  check_finite(y, "GP targets");

  GprModel m;
  m.x_ = x;
  m.targets_ = Standardizer::fit(y);
  const Eigen::VectorXd z = m.targets_.forward(y);
  const Eigen::MatrixXd dist = pairwise_distances(x, x);

  if (options.tune) {
    FitOptions opt = options;
    opt.kernel.validate();
    m.kernel_ = tune(dist, z, opt);
  } else {
    options.kernel.validate();
    m.kernel_ = options.kernel;
  }

  Eigen::MatrixXd k = kernel_matrix(m.kernel_, dist);
  k.diagonal().array() += m.kernel_.noise_variance;
  if (!robust_cholesky(k, m.llt_, m.jitter_))
    throw SingularKernel("kernel matrix not positive definite even with jitter 1e-2");
  m.alpha_ = m.llt_.solve(z);
  const double n = static_cast<double>(z.size());
  m.lml_ = -0.5 * z.dot(m.alpha_) - 0.5 * log_det(m.llt_) - 0.5 * n * kLog2Pi;
  return m;
}

Prediction GprModel::predict(const Eigen::MatrixXd& x) const {
  if (x.cols() != x_.cols())
    throw ShapeError("predict: expected " + std::to_string(x_.cols()) + " columns, got " + std::to_string(x.cols()));
  const Eigen::MatrixXd ks = kernel_matrix(kernel_, pairwise_distances(x, x_));
  Prediction p;
  p.mean = targets_.inverse(ks * alpha_);
  const Eigen::MatrixXd v = llt_.matrixL().solve(ks.transpose());
  const double prior = kernel_.signal_variance + kernel_.noise_variance;
  p.variance = (prior - v.colwise().squaredNorm().array()).cwiseMax(0.0).matrix().transpose();
  return p;
}

std::string GprModel::dump_json(const std::vector<std::string>& training_ids) const {
  nlohmann::json j;
  j["kernel"] = {{"family", "matern"},
                 {"nu", kernel_.nu},
                 {"length_scale", kernel_.length_scale},
                 {"signal_variance", kernel_.signal_variance},
                 {"noise_variance", kernel_.noise_variance}};
  j["target_mean"] = targets_.mean;
  j["target_std"] = targets_.scale;
  j["jitter"] = jitter_;
  j["log_marginal_likelihood"] = lml_;
  j["training_rows"] = x_.rows();
  j["training_ids"] = training_ids;
  return j.dump(2);
}

double log_marginal_likelihood(const MaternKernel& k, const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  if (x.rows() != y.size()) throw ShapeError("row count differs from target count");
  k.validate();
  Eigen::MatrixXd km = kernel_matrix(k, pairwise_distances(x, x));
  km.diagonal().array() += k.noise_variance;
  Eigen::LLT<Eigen::MatrixXd> llt(km);
  if (llt.info() != Eigen::Success) throw SingularKernel("kernel matrix is not positive definite");
  const double n = static_cast<double>(y.size());
  return -0.5 * y.dot(llt.solve(y)) - 0.5 * log_det(llt) - 0.5 * n * kLog2Pi;
}

PearsonResult pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size()) throw ShapeError("pearson: lengths differ");
  if (a.size() < 2) throw ShapeError("pearson: need at least two values");
  const Eigen::ArrayXd da = a.array() - a.mean();
  const Eigen::ArrayXd db = b.array() - b.mean();
  const double saa = da.square().sum(), sbb = db.square().sum();
  auto negligible = [](const Eigen::VectorXd& v, double ss) {
    const double scale = v.cwiseAbs().maxCoeff();
    return ss <= std::pow(1e-12 * scale, 2) * static_cast<double>(v.size());
  };
  if (negligible(a, saa) || negligible(b, sbb)) return {0.0, true};
  return {std::clamp((da * db).sum() / std::sqrt(saa * sbb), -1.0, 1.0), false};
}

}  // namespace perfal::gpr
