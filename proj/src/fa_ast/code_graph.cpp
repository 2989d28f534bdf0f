#include "perfal/code_graph.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>

namespace perfal::fa_ast {

namespace {

constexpr std::array<std::string_view, kEdgeKindCount> kEdgeNames = {
    "AstChild", "AstParent", "NextToken", "NextSibling", "NextUse",
    "IfFlow",   "ElseFlow",  "WhileFlow", "ForFlow",     "NextStatement"};

std::string placeholder_token(std::string_view kind) {
  if (kind == "BlockStatement" || kind == "ArrayInitializer" || kind == "InitializerBlock" ||
      kind == "FinallyBlock")
    return "{}";
  if (kind == "Statement" || kind == "ForControl") return ";";
  if (kind == "This") return "this";
  if (kind == "BreakStatement") return "break";
  if (kind == "ContinueStatement") return "continue";
  if (kind == "ReturnStatement") return "return";
  if (kind == "MethodInvocation" || kind == "SuperConstructorInvocation" ||
      kind == "ExplicitConstructorInvocation")
    return "()";
  return std::string(kind);
}

}  // namespace

std::string_view edge_kind_name(EdgeKind kind) { return kEdgeNames[static_cast<std::size_t>(kind)]; }

EdgeKind parse_edge_kind(std::string_view name) {
  for (std::size_t i = 0; i < kEdgeNames.size(); ++i)
    if (kEdgeNames[i] == name) return static_cast<EdgeKind>(i);
  throw Error("unknown edge kind '" + std::string(name) + "'");
}

std::string_view depth_name(ParseDepth d) { return d == ParseDepth::File ? "file" : "system"; }

ParseDepth parse_depth(std::string_view name) {
  if (name == "file") return ParseDepth::File;
  if (name == "system") return ParseDepth::System;
  throw ConfigError("parse depth must be 'file' or 'system', got '" + std::string(name) + "'");
}

std::array<std::size_t, kEdgeKindCount> CodeGraph::edge_counts() const {
  std::array<std::size_t, kEdgeKindCount> out{};
  for (const auto& e : edges) ++out[static_cast<std::size_t>(e.kind)];
  return out;
}

std::size_t CodeGraph::count(EdgeKind kind) const {
  return static_cast<std::size_t>(
      std::count_if(edges.begin(), edges.end(), [kind](const Edge& e) { return e.kind == kind; }));
}

std::string to_json(const CodeGraph& g, int indent) {
  nlohmann::ordered_json doc;
  doc["path"] = g.path;
  doc["depth"] = std::string(depth_name(g.depth));
  auto nodes = nlohmann::ordered_json::array();
  for (const auto& n : g.nodes) {
    nlohmann::ordered_json jn;
    jn["id"] = n.id;
    jn["kind"] = n.kind;
    if (n.token)
      jn["token"] = *n.token;
    else
      jn["token"] = nullptr;
    nodes.push_back(std::move(jn));
  }
  doc["nodes"] = std::move(nodes);
  auto edges = nlohmann::ordered_json::array();
  for (const auto& e : g.edges)
    edges.push_back(nlohmann::ordered_json::array({e.src, e.dst, std::string(edge_kind_name(e.kind))}));
  doc["edges"] = std::move(edges);
  return doc.dump(indent);
}

CodeGraph graph_from_json(std::string_view text) {
  const auto doc = nlohmann::json::parse(text);
  CodeGraph g;
  g.path = doc.at("path").get<std::string>();
  g.depth = parse_depth(doc.at("depth").get<std::string>());
  const auto& nodes = doc.at("nodes");
  g.nodes.reserve(nodes.size());
  for (const auto& jn : nodes) {
    AstNode n;
    n.id = jn.at("id").get<int>();
    n.kind = jn.at("kind").get<std::string>();
    if (jn.contains("token") && !jn.at("token").is_null()) n.token = jn.at("token").get<std::string>();
    if (n.id != static_cast<int>(g.nodes.size())) throw Error("graph node ids must be dense and ordered");
    g.nodes.push_back(std::move(n));
  }
  for (const auto& je : doc.at("edges")) {
    Edge e{je.at(0).get<int>(), je.at(1).get<int>(), parse_edge_kind(je.at(2).get<std::string>())};
    if (e.src < 0 || e.dst < 0 || e.src >= static_cast<int>(g.nodes.size()) ||
        e.dst >= static_cast<int>(g.nodes.size()))
      throw Error("edge endpoint out of range");
    g.edges.push_back(e);
  }
  return g;
}

std::size_t SyntaxTree::add(std::string kind, std::optional<std::string> token, std::optional<Span> span) {
  nodes_.push_back(Node{std::move(kind), std::move(token), {}, span});
  return nodes_.size() - 1;
}

CodeGraph tree_to_graph(const SyntaxTree& tree, std::string path, ParseDepth depth) {
  CodeGraph g;
  g.path = std::move(path);
  g.depth = depth;
  if (tree.size() == 0) return g;

  // Iterative pre-order walk; the stack holds (tree index, parent graph id).
  std::vector<std::pair<std::size_t, int>> stack{{tree.root(), -1}};
  while (!stack.empty()) {
    auto [idx, parent] = stack.back();
    stack.pop_back();
    const auto& tn = tree[idx];
    AstNode n;
    n.id = static_cast<int>(g.nodes.size());
    n.kind = tn.kind;
    n.span = tn.span;
    if (tn.children.empty())
      n.token = tn.token ? *tn.token : placeholder_token(tn.kind);
    g.nodes.push_back(std::move(n));
    if (parent >= 0) {
      g.edges.push_back({parent, g.nodes.back().id, EdgeKind::AstChild});
      g.edges.push_back({g.nodes.back().id, parent, EdgeKind::AstParent});
    }
    const int self = g.nodes.back().id;
    for (auto it = tn.children.rbegin(); it != tn.children.rend(); ++it) stack.emplace_back(*it, self);
  }
  return g;
}

SyntaxTree graph_to_tree(const CodeGraph& g) {
  SyntaxTree t;
  for (const auto& n : g.nodes) t.add(n.kind, n.token, n.span);
  for (const auto& e : g.edges)
    if (e.kind == EdgeKind::AstChild) t.append_child(static_cast<std::size_t>(e.src), static_cast<std::size_t>(e.dst));
  t.set_root(0);
  return t;
}

CodeGraph ast_only(const CodeGraph& g) {
  CodeGraph out;
  out.path = g.path;
  out.depth = g.depth;
  out.nodes = g.nodes;
  out.partial = g.partial;
  for (const auto& e : g.edges)
    if (is_ast_edge(e.kind)) out.edges.push_back(e);
  return out;
}

}  // namespace perfal::fa_ast
