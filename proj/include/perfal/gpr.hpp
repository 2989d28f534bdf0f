#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "perfal/common.hpp"

namespace perfal::gpr {

class SingularKernel : public Error {
 public:
  using Error::Error;
};

struct MaternKernel {
  double length_scale = 1.0;
  double signal_variance = 1.0;
  double nu = 2.5;  // 0.5, 1.5 or 2.5
  double noise_variance = 1e-2;

  /// Covariance at distance r, without the noise term.
  double operator()(double r) const;
  void validate() const;
};

/// Euclidean distances between the rows of a and b.
Eigen::MatrixXd pairwise_distances(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// Signal part of the kernel matrix, k(x_i, x_j) for all pairs.
Eigen::MatrixXd kernel_matrix(const MaternKernel& k, const Eigen::MatrixXd& distances);

struct Standardizer {
  double mean = 0.0;
  double scale = 1.0;  // population standard deviation, 1 when degenerate

  static Standardizer fit(const Eigen::VectorXd& y);
  Eigen::VectorXd forward(const Eigen::VectorXd& y) const { return (y.array() - mean) / scale; }
  Eigen::VectorXd inverse(const Eigen::VectorXd& z) const { return z.array() * scale + mean; }
};

struct FitOptions {
  bool tune = true;
  std::uint64_t seed = 0;
  /// Used as is when tune is false; when tuning only nu is taken from it.
  MaternKernel kernel;
  int restarts = 5;
  double min_length_scale = 1e-2, max_length_scale = 1e3;
  double min_noise = 1e-6, max_noise = 1.0;
};

struct Prediction {
  Eigen::VectorXd mean;      // raw target scale
  Eigen::VectorXd variance;  // standardized target scale, includes noise
};

class GprModel {
 public:
  const MaternKernel& kernel() const { return kernel_; }
  const Standardizer& targets() const { return targets_; }
  double jitter() const { return jitter_; }
  double log_marginal_likelihood() const { return lml_; }
  const Eigen::MatrixXd& inputs() const { return x_; }
  /// Lower Cholesky factor of K + (noise + jitter) I.
  Eigen::MatrixXd cholesky() const { return llt_.matrixL(); }

  Prediction predict(const Eigen::MatrixXd& x) const;

  /// Kernel hyperparameters and standardization constants; training rows are
  /// referenced through the given ids.
  std::string dump_json(const std::vector<std::string>& training_ids) const;

 private:
  friend GprModel fit(const Eigen::MatrixXd&, const Eigen::VectorXd&, const FitOptions&);
  MaternKernel kernel_;
  Standardizer targets_;
  Eigen::MatrixXd x_;
  Eigen::VectorXd alpha_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  double jitter_ = 0.0;
  double lml_ = 0.0;
};

/// Fit on standardized targets. With tuning, length-scale and noise are found
/// by seeded multi-start coordinate search on the log marginal likelihood in
/// log space; the signal variance takes its closed-form optimum for each
/// candidate. Throws ShapeError on bad shapes, SingularKernel when even a
/// 1e-2 jitter does not make the kernel matrix positive definite.
GprModel fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const FitOptions& options = {});

/// -1/2 y^T K^-1 y - 1/2 log|K| - n/2 log 2 pi with K = kernel + noise I, for
/// targets as given (no standardization).
double log_marginal_likelihood(const MaternKernel& k, const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

struct PearsonResult {
  double r = 0.0;
  bool degenerate = false;  // an input had zero variance; r is reported as 0
};
PearsonResult pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

}  // namespace perfal::gpr
