#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "perfal/common.hpp"

namespace perfal::embed::detail {

/// Walker alias table: O(1) exact sampling from a discrete distribution.
class AliasTable {
 public:
  explicit AliasTable(const std::vector<double>& weights);
  int sample(Rng& rng) const;
  bool empty() const { return prob_.empty(); }

 private:
  std::vector<double> prob_;
  std::vector<int> alias_;
};

/// Negative-sampling trainer for input vectors (documents or centre words)
/// against output vectors (features or context words).
class Sgns {
 public:
  Sgns(int inputs, int outputs, int dim, const std::vector<double>& output_counts, Rng& rng);

  /// One positive pair plus `negatives` sampled pairs; returns the loss.
  double step(int input, int output, double lr, int negatives, Rng& rng);

  Eigen::MatrixXd input_vectors() const;

 private:
  int dim_;
  std::vector<float> in_, out_, grad_;
  AliasTable noise_;
};

inline double linear_rate(double lr0, std::size_t done, std::size_t total) {
  if (total == 0) return lr0;
  return lr0 * std::max(1e-4, 1.0 - static_cast<double>(done) / static_cast<double>(total));
}

}  // namespace perfal::embed::detail
