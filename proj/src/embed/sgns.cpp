#include "sgns.hpp"

#include <algorithm>

namespace perfal::embed::detail {

AliasTable::AliasTable(const std::vector<double>& weights) {
  const auto n = weights.size();
  double total = 0;
  for (double w : weights) total += w;
  if (n == 0 || total <= 0) return;
  prob_.assign(n, 0.0);
  alias_.assign(n, 0);
  std::vector<double> scaled(n);
  std::vector<int> small, large;
  for (std::size_t i = 0; i < n; ++i) {
    scaled[i] = weights[i] * static_cast<double>(n) / total;
    (scaled[i] < 1.0 ? small : large).push_back(static_cast<int>(i));
  }
  while (!small.empty() && !large.empty()) {
    const int s = small.back();
    small.pop_back();
    const int l = large.back();
    prob_[static_cast<std::size_t>(s)] = scaled[static_cast<std::size_t>(s)];
    alias_[static_cast<std::size_t>(s)] = l;
    scaled[static_cast<std::size_t>(l)] -= 1.0 - scaled[static_cast<std::size_t>(s)];
    if (scaled[static_cast<std::size_t>(l)] < 1.0) {
      large.pop_back();
      small.push_back(l);
    }
  }
  for (int i : large) prob_[static_cast<std::size_t>(i)] = 1.0;
  for (int i : small) prob_[static_cast<std::size_t>(i)] = 1.0;
}

int AliasTable::sample(Rng& rng) const {
  const auto i = static_cast<std::size_t>(rng.below(prob_.size()));
  return rng.uniform() < prob_[i] ? static_cast<int>(i) : alias_[i];
}

namespace {

std::vector<double> noise_weights(const std::vector<double>& counts) {
  std::vector<double> w(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) w[i] = std::pow(counts[i], 0.75);
  return w;
}

inline float sigmoid(float x) {
  if (x > 30.f) return 1.f;
  if (x < -30.f) return 0.f;
  return 1.f / (1.f + std::exp(-x));
}

inline double log_sigmoid(double x) { return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x)); }

}  // namespace

Sgns::Sgns(int inputs, int outputs, int dim, const std::vector<double>& output_counts, Rng& rng)
    : dim_(dim),
      in_(static_cast<std::size_t>(inputs) * static_cast<std::size_t>(dim)),
      out_(static_cast<std::size_t>(outputs) * static_cast<std::size_t>(dim), 0.f),
      grad_(static_cast<std::size_t>(dim)),
      noise_(noise_weights(output_counts)) {
  const double scale = 0.5 / dim;
  for (auto& x : in_) x = static_cast<float>(rng.uniform(-scale, scale));
}

double Sgns::step(int input, int output, double lr, int negatives, Rng& rng) {
  const auto d = static_cast<std::size_t>(dim_);
  float* u = &in_[static_cast<std::size_t>(input) * d];
  std::fill(grad_.begin(), grad_.end(), 0.f);
  double loss = 0.0;
  const float alpha = static_cast<float>(lr);
  for (int k = 0; k <= negatives; ++k) {
    int target = output;
    float label = 1.f;
    if (k > 0) {
      if (noise_.empty()) break;
      target = noise_.sample(rng);
      if (target == output) continue;
      label = 0.f;
    }
    float* v = &out_[static_cast<std::size_t>(target) * d];
    float dot = 0.f;
    for (std::size_t i = 0; i < d; ++i) dot += u[i] * v[i];
    loss -= log_sigmoid(label > 0 ? dot : -dot);
    const float g = (label - sigmoid(dot)) * alpha;
    for (std::size_t i = 0; i < d; ++i) {
      grad_[i] += g * v[i];
      v[i] += g * u[i];
    }
  }
  for (std::size_t i = 0; i < d; ++i) u[i] += grad_[i];
  return loss;
}

Eigen::MatrixXd Sgns::input_vectors() const {
  const auto rows = static_cast<Eigen::Index>(in_.size() / static_cast<std::size_t>(dim_));
  Eigen::MatrixXd m(rows, dim_);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (int c = 0; c < dim_; ++c) m(r, c) = in_[static_cast<std::size_t>(r) * static_cast<std::size_t>(dim_) + static_cast<std::size_t>(c)];
  return m;
}

}  // namespace perfal::embed::detail
