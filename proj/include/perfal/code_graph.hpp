#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "perfal/common.hpp"

namespace perfal::fa_ast {

/// The ten edge kinds of a flow-augmented AST. Names are part of the JSON
/// graph format and must not change.
enum class EdgeKind : std::uint8_t {
  AstChild,
  AstParent,
  NextToken,
  NextSibling,
  NextUse,
  IfFlow,
  ElseFlow,
  WhileFlow,
  ForFlow,
  NextStatement,
};

inline constexpr std::size_t kEdgeKindCount = 10;

inline constexpr std::array<EdgeKind, kEdgeKindCount> kAllEdgeKinds = {
    EdgeKind::AstChild, EdgeKind::AstParent, EdgeKind::NextToken, EdgeKind::NextSibling,
    EdgeKind::NextUse,  EdgeKind::IfFlow,    EdgeKind::ElseFlow,  EdgeKind::WhileFlow,
    EdgeKind::ForFlow,  EdgeKind::NextStatement};

std::string_view edge_kind_name(EdgeKind kind);
EdgeKind parse_edge_kind(std::string_view name);

inline bool is_ast_edge(EdgeKind k) { return k == EdgeKind::AstChild || k == EdgeKind::AstParent; }

enum class ParseDepth { File, System };

std::string_view depth_name(ParseDepth d);
ParseDepth parse_depth(std::string_view name);

struct Span {
  int begin_line = 0;
  int end_line = 0;
};

struct AstNode {
  int id = 0;
  std::string kind;
  std::optional<std::string> token;  // set iff the node is a terminal
  std::optional<Span> span;           // debugging only; never serialized

  bool is_terminal() const { return token.has_value(); }
};

struct Edge {
  int src = 0;
  int dst = 0;
  EdgeKind kind = EdgeKind::AstChild;

  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge& a, const Edge& b) = default;
};

/// Directed multigraph of one source file. Node ids equal their index in
/// `nodes`; the root is node 0. AstChild edges appear in sibling order, which
/// is how child order is recovered from the serialized form.
struct CodeGraph {
  std::string path;
  ParseDepth depth = ParseDepth::File;
  std::vector<AstNode> nodes;
  std::vector<Edge> edges;
  bool partial = false;  // front end recovered from a syntax error

  std::size_t size() const { return nodes.size(); }
  std::array<std::size_t, kEdgeKindCount> edge_counts() const;
  std::size_t count(EdgeKind kind) const;
};

std::string to_json(const CodeGraph& g, int indent = -1);
CodeGraph graph_from_json(std::string_view text);

/// Mutable ordered tree used while building and rewriting ASTs.
class SyntaxTree {
 public:
  struct Node {
    std::string kind;
    std::optional<std::string> token;
    std::vector<std::size_t> children;
    std::optional<Span> span;
  };

  std::size_t add(std::string kind, std::optional<std::string> token = std::nullopt,
                  std::optional<Span> span = std::nullopt);
  void append_child(std::size_t parent, std::size_t child) { nodes_[parent].children.push_back(child); }

  const Node& operator[](std::size_t i) const { return nodes_[i]; }
  Node& operator[](std::size_t i) { return nodes_[i]; }
  std::size_t size() const { return nodes_.size(); }
  void truncate(std::size_t n) { nodes_.resize(n); }

  std::size_t root() const { return root_; }
  void set_root(std::size_t r) { root_ = r; }

 private:
  std::vector<Node> nodes_;
  std::size_t root_ = 0;
};

/// Pre-order numbering of the tree reachable from its root, with AstChild and
/// AstParent edges. Childless non-terminals receive a placeholder token so
/// that "terminal iff token" holds.
CodeGraph tree_to_graph(const SyntaxTree& tree, std::string path, ParseDepth depth);

/// Rebuild the ordered tree from a graph's AstChild edges.
SyntaxTree graph_to_tree(const CodeGraph& g);

/// Copy of g with every non-AST edge removed.
CodeGraph ast_only(const CodeGraph& g);

}  // namespace perfal::fa_ast
