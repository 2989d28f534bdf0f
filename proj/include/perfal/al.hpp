#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "perfal/common.hpp"
#include "perfal/gpr.hpp"

namespace perfal::al {

enum class Strategy { Random, Coreset, Variance, Qbc };

std::string_view strategy_name(Strategy s);
Strategy parse_strategy(std::string_view s);

/// Disjoint id sets over [0, corpus size), each sorted ascending.
struct DatasetSplit {
  std::vector<int> labeled;
  std::vector<int> unlabeled;
  std::vector<int> test;
  int iteration = 0;
};

/// Uniform shuffled split: round(test_frac * n) test ids, then l0 labelled
/// ids, the rest unlabelled. ConfigError unless at least one id stays unlabelled.
DatasetSplit make_splits(int corpus_size, double test_frac, int l0_size, std::uint64_t seed);

// ---- query strategies --------------------------------------------------------
// Features are indexed by id (row = id). Every strategy returns ids in pick
// order; ties go to the lowest id.

std::vector<int> select_random(const std::vector<int>& unlabeled, int b, std::uint64_t seed);

/// k-Center-Greedy on Euclidean distance. With no labelled ids the first pick
/// is the lowest unlabelled id.
std::vector<int> select_coreset(const Eigen::MatrixXd& features, const std::vector<int>& labeled,
                                const std::vector<int>& unlabeled, int b);

/// The b largest scores, ties by lowest id.
std::vector<int> top_b(const std::vector<int>& ids, const Eigen::VectorXd& scores, int b);

std::vector<int> select_variance(const gpr::GprModel& model, const Eigen::MatrixXd& features,
                                 const std::vector<int>& unlabeled, int b);

struct Committee {
  Eigen::MatrixXd means;  // one row per surviving member, one column per unlabelled id
  int skipped = 0;        // bootstrap samples with fewer than two distinct points
};

/// Members are fit without tuning, using `kernel`, on bootstrap resamples of
/// the labelled rows (member m draws from derive_seed(seed, m)).
Committee qbc_committee(const Eigen::MatrixXd& features, const std::vector<int>& labeled,
                        const Eigen::VectorXd& labeled_targets, const std::vector<int>& unlabeled, int size,
                        std::uint64_t seed, const gpr::MaternKernel& kernel, unsigned threads = 1);

/// Population variance of the member means per unlabelled id.
Eigen::VectorXd qbc_disagreement(const Committee& c);

struct QbcSelection {
  std::vector<int> ids;
  Eigen::VectorXd disagreement;
  int members = 0;
  bool fell_back = false;  // fewer than two members; variance strategy used
};

QbcSelection select_qbc(const gpr::GprModel& model, const Eigen::MatrixXd& features, const std::vector<int>& labeled,
                        const Eigen::VectorXd& labeled_targets, const std::vector<int>& unlabeled, int b,
                        int committee, std::uint64_t seed, unsigned threads = 1);

// ---- label access ------------------------------------------------------------

/// Mediates every label read so the loop can prove which labels it saw.
class LabelAccess {
 public:
  enum class Phase { Fit, Query, Score };

  LabelAccess(std::vector<double> labels, const DatasetSplit& split);

  void set_phase(Phase p) { phase_ = p; }
  Phase phase() const { return phase_; }
  void reveal(const std::vector<int>& ids);

  /// Label of a revealed training id; anything else counts as a violation.
  double train(int id);
  /// Label of a test id; legal only in the Score phase.
  double test(int id);

  std::size_t test_reads_outside_scoring() const { return test_outside_; }
  std::size_t test_reads() const { return test_reads_; }
  std::size_t unrevealed_reads() const { return unrevealed_; }
  std::size_t size() const { return labels_.size(); }

 private:
  std::vector<double> labels_;
  std::vector<char> is_test_, revealed_;
  Phase phase_ = Phase::Fit;
  std::size_t test_outside_ = 0, test_reads_ = 0, unrevealed_ = 0;
};

// ---- loop ----------------------------------------------------------------------

struct AlOptions {
  double nu = 2.5;
  bool tune = true;
  int committee = 10;
  bool log_targets = false;
  bool standardize_features = true;
  unsigned threads = 1;  // for committee fits
};

struct IterationRecord {
  int iteration = 0;
  int labels_used = 0;
  double pearson = 0.0;
  bool degenerate = false;
  std::vector<int> queried;  // batch taken after scoring this iteration
};

struct AlRun {
  Strategy strategy = Strategy::Random;
  int batch = 0;
  int budget = 0;
  std::uint64_t seed = 0;
  std::vector<IterationRecord> records;
  std::size_t test_reads_during_query = 0;
  std::size_t unrevealed_reads = 0;
  bool sets_consistent = true;  // L and U disjoint, union constant, batches from U
  std::vector<std::string> warnings;
  std::optional<std::string> error;  // set when an iteration failed; records hold the partial curve
};

/// Columns standardized with the mean and population deviation of `rows`;
/// constant columns are only centred.
Eigen::MatrixXd standardize_columns(const Eigen::MatrixXd& features, const std::vector<int>& rows);

/// Pool-based batch loop: fit on L, score on T, query a batch from U, repeat
/// until `budget` labels are used or U is empty. budget <= 0 means the full pool.
AlRun run_active(const Eigen::MatrixXd& features, LabelAccess& labels, const DatasetSplit& split, Strategy strategy,
                 int batch, int budget, std::uint64_t seed, const AlOptions& options = {});

/// Convenience overload owning its LabelAccess.
AlRun run_active(const Eigen::MatrixXd& features, const std::vector<double>& labels, const DatasetSplit& split,
                 Strategy strategy, int batch, int budget, std::uint64_t seed, const AlOptions& options = {});

/// Fit on L_0 only and score on T: run_active with budget |L_0|.
gpr::PearsonResult run_passive(const Eigen::MatrixXd& features, const std::vector<double>& labels,
                               const DatasetSplit& split, std::uint64_t seed, const AlOptions& options = {});

/// iteration,labels_used,pearson,queried_ids with ids joined by ';'. Names
/// replace numeric ids when given.
std::string run_csv(const AlRun& run, const std::vector<std::string>* names = nullptr);

}  // namespace perfal::al
