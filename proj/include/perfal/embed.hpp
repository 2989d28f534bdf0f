#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "perfal/code_graph.hpp"
#include "perfal/common.hpp"

namespace perfal::embed {

enum class Method { Graph2Vec, DeepWalk, Node2Vec, Hope, GraRep, Manual };
enum class Aggregation { Mean, Sum, None };

/// Which graphs an embedding fit may look at.
///   TrainUnlabeledTest: one fit over every graph.
///   TrainUnlabeled: labelled and unlabelled graphs only; meaningful for the
///     manual embedding, which never looks at other graphs anyway.
///   SplitSpace: L and U rows from a fit on L+U, T rows from a second fit on
///     L+U+T. The two halves live in different feature spaces.
enum class Scope { TrainUnlabeledTest, TrainUnlabeled, SplitSpace };

std::string_view method_name(Method m);
Method parse_method(std::string_view s);
std::string_view aggregation_name(Aggregation a);
Aggregation parse_aggregation(std::string_view s);
std::string_view scope_name(Scope s);
Scope parse_scope(std::string_view s);

/// Graph2Vec and the manual metrics are graph-level; everything else embeds
/// nodes and needs an aggregation.
bool is_graph_level(Method m);
Aggregation default_aggregation(Method m);

struct EmbeddingConfig {
  Method method = Method::Graph2Vec;
  int dim = 128;
  Aggregation aggregation = Aggregation::None;
  Scope scope = Scope::TrainUnlabeledTest;
  std::uint64_t seed = 0;

  // Graph2Vec
  int wl_iterations = 3;
  int min_count = 5;
  int g2v_epochs = 50;

  // Skip-gram shared by Graph2Vec, DeepWalk and Node2Vec
  int negatives = 5;
  double learning_rate = 0.025;

  // DeepWalk / Node2Vec
  int walks_per_node = 10;
  int walk_length = 40;
  int window = 5;
  int walk_epochs = 5;
  double p = 1.0;
  double q = 1.0;

  // HOPE; unset means 0.5 / max out-degree
  std::optional<double> beta;

  // GraRep
  int grarep_steps = 4;

  /// Throws ConfigError on invalid or incompatible settings.
  void validate() const;
};

std::string config_to_json(const EmbeddingConfig& c);
EmbeddingConfig config_from_json(std::string_view text);

// ---- Weisfeiler-Lehman features and Graph2Vec --------------------------------

/// labels[k][v] is node v's label after k refinement rounds. Round 0 hashes
/// the node's (kind, token) key; round k hashes the previous label with the
/// sorted labels of v's distinct out-neighbours over all edge kinds.
using WlLabels = std::vector<std::vector<std::uint64_t>>;
WlLabels wl_relabel(const fa_ast::CodeGraph& g, int iterations);

/// The "words" of one graph: one feature per node and round, with the round
/// folded into the id so equal labels from different rounds stay distinct.
std::vector<std::uint64_t> wl_features(const fa_ast::CodeGraph& g, int iterations);

/// One row per graph, in corpus order.
Eigen::MatrixXd graph2vec_fit(const std::vector<const fa_ast::CodeGraph*>& corpus, const EmbeddingConfig& cfg,
                              std::uint64_t seed);

// ---- random walks and skip-gram ---------------------------------------------

/// Adjacency used by walks: sorted distinct out-neighbours over all edge kinds.
using Adjacency = std::vector<std::vector<int>>;
Adjacency out_adjacency(const fa_ast::CodeGraph& g);

/// walks_per_node rounds, each starting one walk at every node in id order.
/// With p = q = 1 every step is uniform over out-neighbours; otherwise the
/// step from t to v to x is weighted 1/p if x = t, 1 if t -> x is an edge and
/// 1/q otherwise. Walks stop early at nodes without out-edges.
std::vector<std::vector<int>> random_walks(const Adjacency& adj, int walks_per_node, int walk_length, double p,
                                           double q, std::uint64_t seed);

struct SkipGramOptions {
  int dim = 128;
  int window = 5;
  int negatives = 5;
  int epochs = 5;
  double learning_rate = 0.025;
  std::uint64_t seed = 0;
};

struct SkipGramResult {
  Eigen::MatrixXd vectors;         // one row per token id
  std::vector<double> epoch_loss;  // mean negative-sampling loss per epoch
};

/// Skip-gram with negative sampling over token sequences with ids in
/// [0, vocab). Negatives are drawn from unigram counts raised to 0.75, the
/// learning rate decays linearly, training is single threaded.
SkipGramResult skipgram_fit(const std::vector<std::vector<int>>& sequences, int vocab, const SkipGramOptions& opt);

// ---- matrix factorisation ---------------------------------------------------

class BetaTooLarge : public ConfigError {
 public:
  BetaTooLarge(double beta, double spectral_radius);
  double beta;
  double spectral_radius;
};

/// Bounds on the spectral radius of a non-negative matrix from shifted power
/// iteration (Collatz-Wielandt quotients).
struct SpectralBounds {
  double lower = 0.0;
  double upper = 0.0;
};
SpectralBounds spectral_radius_bounds(const Eigen::MatrixXd& a, int iterations = 200);

/// Katz similarity (I - beta A)^-1 beta A of the simple adjacency matrix.
Eigen::MatrixXd katz_matrix(const Eigen::MatrixXd& adjacency, double beta);

/// Rank-k truncated SVD with a fixed sign convention (each left singular
/// vector has a non-negative sum). Components beyond the matrix rank are zero.
struct Svd {
  Eigen::MatrixXd u;
  Eigen::VectorXd s;
  Eigen::MatrixXd v;
};
Svd truncated_svd(const Eigen::MatrixXd& m, int k, std::uint64_t seed);

Eigen::MatrixXd simple_adjacency(const fa_ast::CodeGraph& g);

/// Rows are nodes; columns are the dim/2 source coordinates U sqrt(S)
/// followed by the dim/2 target coordinates V sqrt(S).
Eigen::MatrixXd hope_fit(const Eigen::MatrixXd& adjacency, int dim, std::optional<double> beta);

/// GraRep log-shifted k-step transition matrices, one per step.
std::vector<Eigen::MatrixXd> grarep_matrices(const Eigen::MatrixXd& adjacency, int steps);

/// Per step a rank dim/steps factor U sqrt(S); the steps are concatenated.
Eigen::MatrixXd grarep_fit(const Eigen::MatrixXd& adjacency, int dim, int steps);

// ---- corpus-level embedding -------------------------------------------------

Eigen::VectorXd aggregate(const Eigen::MatrixXd& node_vectors, Aggregation mode);

/// Node-level embedding of a single graph for a node-level method.
Eigen::MatrixXd node_embedding(const fa_ast::CodeGraph& g, const EmbeddingConfig& cfg, std::uint64_t seed);

struct Split {
  std::vector<int> labeled;
  std::vector<int> unlabeled;
  std::vector<int> test;
};

struct EmbeddingMatrix {
  Eigen::MatrixXd rows;     // one row per corpus graph
  std::vector<int> space;   // 0 = train feature space, 1 = the separate test space
  EmbeddingConfig config;
};

/// Embed every graph of the corpus under cfg's scope. For the full scope the
/// split may be empty.
EmbeddingMatrix embed_corpus(const std::vector<fa_ast::CodeGraph>& corpus, const Split& split,
                             const EmbeddingConfig& cfg);

void save_embedding(const EmbeddingMatrix& m, const std::vector<std::string>& graph_ids, const std::string& csv_path);
EmbeddingMatrix load_embedding(const std::string& csv_path, std::vector<std::string>* graph_ids = nullptr);

}  // namespace perfal::embed
