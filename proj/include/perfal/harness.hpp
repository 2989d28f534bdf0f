#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "perfal/al.hpp"
#include "perfal/code_graph.hpp"
#include "perfal/embed.hpp"

namespace perfal::harness {

namespace fs = std::filesystem;

// ---- labels and ingestion --------------------------------------------------------

enum class LabelAggregation { Mean, Median };
std::string_view label_aggregation_name(LabelAggregation a);
LabelAggregation parse_label_aggregation(std::string_view s);

struct LabelRow {
  std::string path;
  double duration_ms = 0.0;
};

/// CSV `path,duration_ms`; a header row is optional. ConfigError on a
/// malformed row or a non-positive or non-finite duration.
std::vector<LabelRow> read_labels(const fs::path& file);

/// One label per path, aggregated over repeated runs.
std::map<std::string, double> aggregate_labels(const std::vector<LabelRow>& rows, LabelAggregation agg);

struct IngestReport {
  std::vector<std::string> missing_label;  // sources without a label row
  std::vector<std::string> missing_file;   // label rows without a source
  std::vector<std::string> parse_failed;   // "path: message"
};

struct Corpus {
  std::vector<std::string> ids;  // source paths relative to the corpus root, sorted
  std::vector<fa_ast::CodeGraph> graphs;
  std::vector<double> labels;  // empty when ingested without a labels file
  fa_ast::ParseDepth depth = fa_ast::ParseDepth::File;
  IngestReport report;
};

/// Relative paths of every .java file under dir, sorted.
std::vector<std::string> list_sources(const fs::path& dir);

/// Parse every source under dir; unparsable files are reported and dropped.
Corpus parse_directory(const fs::path& dir, fa_ast::ParseDepth depth);

/// Parse and label: keeps the intersection of parsable sources and labelled
/// paths. ConfigError when the intersection is empty.
Corpus ingest(const fs::path& corpus_dir, const fs::path& labels_file, fa_ast::ParseDepth depth,
              LabelAggregation agg = LabelAggregation::Mean);

/// Graph JSON documents, one per file, mirroring the source layout.
void write_graphs(const Corpus& c, const fs::path& out_dir);
std::vector<fa_ast::CodeGraph> read_graphs(const fs::path& dir);

/// path plus the twelve metric slots in their fixed order.
std::string metrics_csv(const std::vector<fa_ast::CodeGraph>& graphs);

// ---- artifact cache ----------------------------------------------------------------

/// Content-addressed store under $PERFAL_CACHE_DIR (default
/// $XDG_CACHE_HOME/perfal or ~/.cache/perfal). Disabled caches never read or write.
class Cache {
 public:
  explicit Cache(bool enabled, std::optional<fs::path> root = std::nullopt);
  bool enabled() const { return enabled_; }
  const fs::path& root() const { return root_; }
  std::optional<fs::path> find(const std::string& kind, std::uint64_t key) const;
  fs::path slot(const std::string& kind, std::uint64_t key) const;

 private:
  bool enabled_;
  fs::path root_;
};

std::uint64_t corpus_hash(const Corpus& c);

// ---- experiment ----------------------------------------------------------------------

struct NamedEmbedding {
  std::string name;
  embed::EmbeddingConfig config;
};

struct ExperimentConfig {
  std::string corpus_dir;
  std::string labels_file;
  fa_ast::ParseDepth depth = fa_ast::ParseDepth::File;
  LabelAggregation label_aggregation = LabelAggregation::Mean;
  std::vector<NamedEmbedding> embeddings;
  std::vector<al::Strategy> strategies;
  int l0_size = 30;
  int batch_size = 20;
  int budget = 0;  // 0 = full pool
  double test_frac = 0.2;
  std::vector<std::uint64_t> seeds;
  std::string output_dir;
  /// Refit seed-dependent embeddings for every experiment seed; otherwise one
  /// fit with the embedding's own seed is shared by all seeds.
  bool embedding_per_seed = false;
  al::AlOptions al;
  unsigned threads = 0;  // 0 = all hardware threads

  void validate() const;
};

/// Fifteen seeds 0..14, all strategies, Graph2Vec and manual embeddings.
ExperimentConfig default_experiment();
std::string experiment_to_json(const ExperimentConfig& c);
/// Keys present in the JSON override `base`; absent keys keep its values.
ExperimentConfig experiment_from_json(std::string_view text, const ExperimentConfig& base = default_experiment());
ExperimentConfig load_experiment(const fs::path& file);

struct AggregatePoint {
  int labels_used = 0;
  double mean = 0.0;
  double std = 0.0;  // population standard deviation over seeds
  int runs = 0;
};

/// Per labels-used point across runs; points missing from a run (failed
/// iteration) are averaged over the runs that have them.
std::vector<AggregatePoint> aggregate_runs(const std::vector<std::vector<al::IterationRecord>>& runs);
std::string aggregate_csv(const std::vector<AggregatePoint>& points);
std::vector<AggregatePoint> parse_aggregate_csv(std::string_view text);

struct Series {
  std::string name;
  std::vector<AggregatePoint> points;
};

/// Learning curves with a mean +- std band per series.
std::string curves_svg(const std::string& title, const std::vector<Series>& series);
/// The data behind a plot: the aggregate columns with a leading series column.
std::string curves_csv(const std::vector<Series>& series);

struct PassiveScore {
  std::string embedding;
  std::uint64_t seed = 0;
  double pearson = 0.0;
  bool degenerate = false;
};

struct CellFailure {
  std::string embedding;
  std::string strategy;  // "passive" for the passive fit
  std::uint64_t seed = 0;
  std::string message;
};

struct ExperimentResult {
  fs::path output_dir;
  std::vector<PassiveScore> passive;
  std::vector<CellFailure> failures;
  std::size_t test_reads_during_query = 0;
  std::size_t unrevealed_reads = 0;
  bool sets_consistent = true;
  int exit_code() const { return failures.empty() ? 0 : 1; }
};

using Progress = std::function<void(const std::string&)>;

/// Runs every (embedding, strategy, seed) cell plus the passive baselines and
/// writes runs, aggregates, plots, the passive table and a config snapshot.
ExperimentResult run_experiment(const ExperimentConfig& cfg, const Cache& cache, const Progress& progress = {});

/// Passive baselines only.
ExperimentResult run_passive_experiment(const ExperimentConfig& cfg, const Cache& cache,
                                        const Progress& progress = {});

/// Markdown summary of a result directory.
std::string report(const fs::path& result_dir);

/// File-name-safe form of a label.
std::string slug(std::string_view s);

}  // namespace perfal::harness
