#include <algorithm>
#include <array>
#include <map>
#include <string_view>
#include <unordered_set>

#include "perfal/fa_ast.hpp"

namespace perfal::fa_ast {

namespace {

constexpr std::array<std::string_view, 20> kStatementKinds = {
    "LocalVariableDeclaration", "StatementExpression", "IfStatement",       "WhileStatement",
    "DoStatement",              "ForStatement",        "TryStatement",      "SwitchStatement",
    "ReturnStatement",          "ThrowStatement",      "BreakStatement",    "ContinueStatement",
    "AssertStatement",          "SynchronizedStatement", "BlockStatement",  "LabeledStatement",
    "Statement",                "YieldStatement",      "ClassDeclaration",  "RecordDeclaration"};

constexpr std::array<std::string_view, 7> kStatementContainers = {
    "BlockStatement", "MethodDeclaration", "ConstructorDeclaration", "InitializerBlock",
    "CatchClause",    "FinallyBlock",      "SwitchStatementCase"};

constexpr std::array<std::string_view, 20> kScopeKinds = {
    "CompilationUnit",   "ClassDeclaration",      "InterfaceDeclaration", "EnumDeclaration",
    "RecordDeclaration", "AnnotationDeclaration", "ClassCreator",         "MethodDeclaration",
    "ConstructorDeclaration", "LambdaExpression", "BlockStatement",       "ForStatement",
    "CatchClause",       "TryStatement",          "SwitchStatement",      "SwitchExpression",
    "InitializerBlock",  "FinallyBlock",          "ResolvedReference",    "SwitchStatementCase"};

constexpr std::array<std::string_view, 5> kClassKinds = {
    "ClassDeclaration", "InterfaceDeclaration", "EnumDeclaration", "RecordDeclaration", "ClassCreator"};

template <std::size_t N>
bool contains(const std::array<std::string_view, N>& set, std::string_view s) {
  return std::find(set.begin(), set.end(), s) != set.end();
}

struct Tree {
  std::vector<std::vector<int>> children;
  std::vector<int> order;  // pre-order
  int root = 0;
};

Tree build_tree(const CodeGraph& g) {
  Tree t;
  const auto n = g.nodes.size();
  t.children.assign(n, {});
  std::vector<bool> has_parent(n, false);
  for (const auto& e : g.edges) {
    if (e.kind != EdgeKind::AstChild) continue;
    t.children[static_cast<std::size_t>(e.src)].push_back(e.dst);
    has_parent[static_cast<std::size_t>(e.dst)] = true;
  }
  if (n == 0) return t;
  t.root = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (!has_parent[i]) {
      t.root = static_cast<int>(i);
      break;
    }
  std::vector<int> stack{t.root};
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    t.order.push_back(v);
    const auto& ch = t.children[static_cast<std::size_t>(v)];
    for (auto it = ch.rbegin(); it != ch.rend(); ++it) stack.push_back(*it);
  }
  return t;
}

// Lexically scoped, single-pass, name-based variable tracking.
class UseTracker {
 public:
  UseTracker(const CodeGraph& g, const Tree& t, std::vector<Edge>& out) : g_(g), t_(t), out_(out) {}

  void run() { visit(t_.root); }

 private:
  struct Var {
    int last = -1;
    std::map<std::string, int, std::less<>> dotted_last;
  };

  const AstNode& node(int v) const { return g_.nodes[static_cast<std::size_t>(v)]; }
  const std::vector<int>& kids(int v) const { return t_.children[static_cast<std::size_t>(v)]; }

  std::size_t declare(const std::string& name, int decl_node) {
    vars_.push_back(Var{decl_node, {}});
    scopes_.back()[name] = vars_.size() - 1;
    return vars_.size() - 1;
  }

  std::optional<std::size_t> lookup(std::string_view name) const {
    for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
      auto f = it->find(name);
      if (f != it->end()) return f->second;
    }
    return std::nullopt;
  }

  void link(int& last, int use) {
    if (last >= 0 && last != use) out_.push_back({last, use, EdgeKind::NextUse});
    last = use;
  }

  void use(int v) {
    const auto& text = *node(v).token;
    const auto dot = text.find('.');
    if (dot == std::string::npos) {
      if (auto var = lookup(text)) link(vars_[*var].last, v);
      return;
    }
    if (auto var = lookup(std::string_view(text).substr(0, dot))) {
      auto& chain = vars_[*var].dotted_last;
      auto it = chain.find(text);
      if (it == chain.end()) it = chain.emplace(text, -1).first;
      link(it->second, v);
    }
  }

  static std::optional<int> last_identifier(const CodeGraph& g, const std::vector<int>& ch) {
    for (auto it = ch.rbegin(); it != ch.rend(); ++it)
      if (g.nodes[static_cast<std::size_t>(*it)].kind == "Identifier") return *it;
    return std::nullopt;
  }

  void prebind_members(int cls) {
    for (int c : kids(cls)) {
      const auto& k = node(c).kind;
      if (k == "FieldDeclaration") {
        for (int d : kids(c)) {
          if (node(d).kind != "VariableDeclarator" || kids(d).empty()) continue;
          const int id = kids(d).front();
          declare(*node(id).token, id);
          prebound_.insert(id);
        }
      } else if (k == "EnumConstantDeclaration") {
        const int id = node(c).is_terminal() ? c : kids(c).front();
        declare(*node(id).token, id);
        prebound_.insert(id);
      } else if (k == "FormalParameter" && node(cls).kind == "RecordDeclaration") {
        if (auto id = last_identifier(g_, kids(c))) {
          declare(*node(*id).token, *id);
          prebound_.insert(*id);
        }
      }
    }
  }

  void declare_site(int v) {
    if (prebound_.count(v)) return;
    declare(*node(v).token, v);
  }

  void visit(int v) {
    const auto& n = node(v);
    const bool scoped = contains(kScopeKinds, n.kind);
    if (scoped) scopes_.emplace_back();
    if (contains(kClassKinds, n.kind)) {
      declare("this", -1);
      prebind_members(v);
    }

    if (n.is_terminal()) {
      if (n.kind == "MemberReference" || n.kind == "Qualifier")
        use(v);
      else if (n.kind == "InferredFormalParameter")
        declare_site(v);
    } else {
      const auto& ch = kids(v);
      if (n.kind == "VariableDeclarator" && !ch.empty() && node(ch.front()).kind == "Identifier") {
        declare_site(ch.front());
      } else if (n.kind == "FormalParameter" || n.kind == "CatchClauseParameter" || n.kind == "TryResource" ||
                 n.kind == "PatternVariable") {
        if (auto id = last_identifier(g_, ch)) declare_site(*id);
      }
      for (int c : ch) visit(c);
    }
    if (scoped) scopes_.pop_back();
  }

  const CodeGraph& g_;
  const Tree& t_;
  std::vector<Edge>& out_;
  std::vector<Var> vars_;
  std::vector<std::map<std::string, std::size_t, std::less<>>> scopes_;
  std::unordered_set<int> prebound_;
};

}  // namespace

CodeGraph augment_flow(const CodeGraph& input) {
  CodeGraph g = ast_only(input);
  if (g.nodes.empty()) return g;
  const Tree t = build_tree(g);
  auto kind_of = [&](int v) -> const std::string& { return g.nodes[static_cast<std::size_t>(v)].kind; };

  std::vector<Edge> next_token, next_sibling, next_use, control, next_statement;

  int prev_terminal = -1;
  for (int v : t.order) {
    const auto& ch = t.children[static_cast<std::size_t>(v)];
    if (ch.empty()) {
      if (prev_terminal >= 0) next_token.push_back({prev_terminal, v, EdgeKind::NextToken});
      prev_terminal = v;
      continue;
    }
    for (std::size_t i = 1; i < ch.size(); ++i) next_sibling.push_back({ch[i - 1], ch[i], EdgeKind::NextSibling});

    const auto& kind = kind_of(v);
    if (kind == "IfStatement" && ch.size() >= 2) {
      control.push_back({ch[0], ch[1], EdgeKind::IfFlow});
      if (ch.size() >= 3) control.push_back({ch[0], ch[2], EdgeKind::ElseFlow});
    } else if (kind == "WhileStatement" && ch.size() == 2) {
      control.push_back({ch[0], ch[1], EdgeKind::WhileFlow});
      next_use.push_back({ch[1], ch[0], EdgeKind::NextUse});
    } else if (kind == "ForStatement" && ch.size() == 2) {
      control.push_back({ch[0], ch[1], EdgeKind::ForFlow});
      next_use.push_back({ch[1], ch[0], EdgeKind::NextUse});
    }

    if (contains(kStatementContainers, kind)) {
      int prev = -1;
      for (int c : ch) {
        if (!contains(kStatementKinds, kind_of(c))) continue;
        if (prev >= 0) next_statement.push_back({prev, c, EdgeKind::NextStatement});
        prev = c;
      }
    }
  }

  UseTracker(g, t, next_use).run();

  for (auto* part : {&next_token, &next_sibling, &next_use, &control, &next_statement})
    g.edges.insert(g.edges.end(), part->begin(), part->end());
  return g;
}

CodeGraph build_file_graph(std::string_view source, std::string path) {
  return augment_flow(parse_ast(strip_comments(source), std::move(path)));
}

}  // namespace perfal::fa_ast
