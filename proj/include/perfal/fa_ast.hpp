#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "perfal/code_graph.hpp"
#include "perfal/java.hpp"

namespace perfal::fa_ast {

/// Add the flow edges (NextToken, NextSibling, NextUse, If/Else/While/For
/// flow, NextStatement) implied by the AST edges of g. Existing flow edges
/// are discarded first, so the operation is idempotent.
///
/// Loops additionally get a NextUse edge from the body back to the
/// condition (while) or loop header (for); those are the only NextUse edges
/// whose endpoints are not identically named terminals.
CodeGraph augment_flow(const CodeGraph& g);

/// strip_comments + parse_ast + augment_flow.
CodeGraph build_file_graph(std::string_view source, std::string path);

struct ResolutionCycle {
  std::string from;  // declaration being expanded
  std::string to;    // declaration that would have been re-entered
};

struct SystemGraph {
  CodeGraph graph;
  std::vector<ResolutionCycle> cycles;
};

/// Index of the method and type declarations available for system-level
/// inlining, built once per corpus of file-level graphs.
class DeclarationIndex {
 public:
  explicit DeclarationIndex(const std::vector<CodeGraph>& corpus);

  struct Location {
    std::size_t graph = 0;
    int node = 0;
    std::string label;  // "method foo/2" or "type Foo"
  };

  /// Matches by simple name and argument count.
  std::optional<Location> find_method(const std::string& name, std::size_t arity) const;
  std::optional<Location> find_type(const std::string& name) const;

  const std::vector<CodeGraph>& corpus() const { return *corpus_; }
  const SyntaxTree& tree(std::size_t graph) const { return trees_[graph]; }

 private:
  const std::vector<CodeGraph>* corpus_;
  std::vector<SyntaxTree> trees_;
  std::map<std::pair<std::string, std::size_t>, Location> methods_;
  std::map<std::string, Location> types_;
};

/// Inline corpus-local declarations referenced from g. Each declaration is
/// inlined at most once per graph; declarations from g's own file are never
/// inlined. Resolved leaves are wrapped in a `ResolvedReference` node whose
/// children are the original leaf and the inlined declaration subtree.
SystemGraph resolve_system_level(const DeclarationIndex& index, std::size_t graph_index);

/// Convenience overload that builds an index for a single call.
SystemGraph resolve_system_level(const std::vector<CodeGraph>& corpus, std::size_t graph_index);

/// Map from (kind, token) to dense ids in lexicographic key order; terminals
/// without token never occur, non-terminals use the "no token" key which
/// sorts before every token.
class Vocabulary {
 public:
  using Key = std::pair<std::string, std::optional<std::string>>;

  Vocabulary() = default;
  explicit Vocabulary(std::vector<Key> sorted_unique_keys);

  std::size_t size() const { return keys_.size(); }
  std::optional<std::size_t> find(const std::string& kind, const std::optional<std::string>& token) const;
  std::size_t id(const AstNode& n) const;
  const std::vector<Key>& keys() const { return keys_; }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.keys_ == b.keys_; }

 private:
  std::vector<Key> keys_;
  std::map<Key, std::size_t> index_;
};

Vocabulary build_vocabulary(const std::vector<CodeGraph>& corpus);

}  // namespace perfal::fa_ast
