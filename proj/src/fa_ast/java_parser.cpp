// Recursive-descent parser for Java source (roughly Java 11 plus a few newer
// forms) producing an ordered syntax tree with normalized node kinds.
//
// Tree conventions:
//   * plain names, literals, simple types and other childless constructs are
//     terminal nodes carrying their source text as token;
//   * string attributes of composite nodes (names, operators, modifiers)
//     become terminal children in source order;
//   * operator-bearing nodes list the operator first, then the operands.

#include <algorithm>
#include <array>
#include <functional>
#include <optional>

#include "perfal/java.hpp"

namespace perfal::fa_ast {

namespace {

using NodeId = std::size_t;

constexpr std::array<std::string_view, 8> kPrimitives = {"boolean", "byte", "char",  "short",
                                                         "int",     "long", "float", "double"};

constexpr std::array<std::string_view, 12> kModifiers = {
    "public",    "protected",    "private",   "static",   "abstract", "final",
    "native",    "synchronized", "transient", "volatile", "strictfp", "default"};

bool is_primitive(std::string_view s) {
  return std::find(kPrimitives.begin(), kPrimitives.end(), s) != kPrimitives.end();
}

bool is_modifier(std::string_view s) {
  return std::find(kModifiers.begin(), kModifiers.end(), s) != kModifiers.end();
}

int binary_precedence(std::string_view op) {
  if (op == "||") return 1;
  if (op == "&&") return 2;
  if (op == "|") return 3;
  if (op == "^") return 4;
  if (op == "&") return 5;
  if (op == "==" || op == "!=") return 6;
  if (op == "<" || op == ">" || op == "<=" || op == ">=" || op == "instanceof") return 7;
  if (op == "<<" || op == ">>" || op == ">>>") return 8;
  if (op == "+" || op == "-") return 9;
  if (op == "*" || op == "/" || op == "%") return 10;
  return 0;
}

bool is_assignment_op(std::string_view op) {
  static constexpr std::array<std::string_view, 12> ops = {"=",  "+=", "-=", "*=",  "/=",  "%=",
                                                           "&=", "|=", "^=", "<<=", ">>=", ">>>="};
  return std::find(ops.begin(), ops.end(), op) != ops.end();
}

class Parser {
 public:
  explicit Parser(std::string_view source) : toks_(tokenize(source)) {}

  SyntaxTree run() {
    const NodeId root = compilation_unit();
    tree_.set_root(root);
    return std::move(tree_);
  }

 private:
  // ---- token helpers -------------------------------------------------------

  const Token& peek(std::size_t k = 0) const {
    const auto i = std::min(pos_ + k, toks_.size() - 1);
    return toks_[i];
  }
  bool at(std::string_view text, std::size_t k = 0) const {
    const auto& t = peek(k);
    return t.kind != TokenKind::End && t.kind != TokenKind::Literal && t.text == text;
  }
  bool at_ident(std::size_t k = 0) const { return peek(k).kind == TokenKind::Identifier; }
  bool at_end() const { return peek().kind == TokenKind::End; }
  bool adjacent(std::size_t k) const { return peek(k).end == peek(k + 1).begin; }

  const Token& take() {
    const Token& t = toks_[pos_];
    if (t.kind != TokenKind::End) ++pos_;
    return t;
  }

  bool accept(std::string_view text) {
    if (!at(text)) return false;
    take();
    return true;
  }

  const Token& expect(std::string_view text) {
    if (!at(text)) fail("expected '" + std::string(text) + "'");
    return take();
  }

  std::string expect_ident() {
    if (!at_ident()) fail("expected identifier");
    return take().text;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    const auto& t = peek();
    const std::string found = t.kind == TokenKind::End ? "end of input" : "'" + t.text + "'";
    throw ParseError(msg + ", found " + found, t.line, t.column);
  }

  // Speculative parse; on failure the token position and any nodes created
  // by the attempt are rolled back.
  template <class F>
  auto attempt(F&& f) -> std::optional<decltype(f())> {
    const auto saved_pos = pos_;
    const auto saved_nodes = tree_.size();
    try {
      return f();
    } catch (const ParseError&) {
      pos_ = saved_pos;
      tree_.truncate(saved_nodes);
      return std::nullopt;
    }
  }

  template <class F>
  bool lookahead(F&& f) {
    const auto saved_pos = pos_;
    const auto saved_nodes = tree_.size();
    bool ok = true;
    try {
      f();
    } catch (const ParseError&) {
      ok = false;
    }
    pos_ = saved_pos;
    tree_.truncate(saved_nodes);
    return ok;
  }

  // ---- node helpers --------------------------------------------------------

  Span span_from(std::size_t start_tok) const {
    const int begin = toks_[std::min(start_tok, toks_.size() - 1)].line;
    const int end = pos_ > 0 ? toks_[pos_ - 1].line : begin;
    return Span{begin, std::max(begin, end)};
  }

  NodeId leaf(std::string kind, std::string token, std::size_t start_tok) {
    return tree_.add(std::move(kind), std::move(token), span_from(start_tok));
  }

  NodeId node(std::string kind, const std::vector<NodeId>& kids, std::size_t start_tok) {
    const NodeId id = tree_.add(std::move(kind), std::nullopt, span_from(start_tok));
    for (auto k : kids) tree_.append_child(id, k);
    return id;
  }

  static void append(std::vector<NodeId>& dst, const std::vector<NodeId>& src) {
    dst.insert(dst.end(), src.begin(), src.end());
  }

  std::string qualified_name() {
    std::string name = expect_ident();
    while (at(".") && at_ident(1)) {
      take();
      name += "." + take().text;
    }
    return name;
  }

  // ---- compilation unit ----------------------------------------------------

  NodeId compilation_unit() {
    const auto start = pos_;
    std::vector<NodeId> kids;
    if (at("@") && !at("interface", 1)) {
      const auto saved = pos_;
      const auto saved_nodes = tree_.size();
      modifiers();
      if (!at("package")) {
        pos_ = saved;
        tree_.truncate(saved_nodes);
      } else {
        tree_.truncate(saved_nodes);
      }
    }
    if (at("package")) {
      const auto s = pos_;
      take();
      auto name = qualified_name();
      expect(";");
      kids.push_back(leaf("PackageDeclaration", name, s));
    }
    while (at("import")) {
      const auto s = pos_;
      take();
      const bool is_static = accept("static");
      auto name = qualified_name();
      if (accept(".")) {
        expect("*");
        name += ".*";
      }
      expect(";");
      kids.push_back(leaf(is_static ? "StaticImport" : "Import", name, s));
    }
    while (!at_end()) {
      if (accept(";")) continue;
      kids.push_back(type_declaration());
    }
    return node("CompilationUnit", kids, start);
  }

  std::vector<NodeId> modifiers() {
    std::vector<NodeId> out;
    while (true) {
      if (at("@") && !at("interface", 1)) {
        out.push_back(annotation());
      } else if (peek().kind == TokenKind::Keyword && is_modifier(peek().text) &&
                 !(peek().text == "default" && (at(":", 1) || at("->", 1)))) {
        const auto s = pos_;
        out.push_back(leaf("Modifier", take().text, s));
      } else if (at_ident() && (peek().text == "sealed" || peek().text == "non") &&
                 (at_ident(1) || at("-", 1) || at("class", 1) || at("interface", 1))) {
        // sealed / non-sealed
        const auto s = pos_;
        std::string text = take().text;
        if (text == "non" && accept("-")) text += "-" + expect_ident();
        out.push_back(leaf("Modifier", text, s));
      } else {
        break;
      }
    }
    return out;
  }

  NodeId annotation() {
    const auto s = pos_;
    expect("@");
    const auto name = qualified_name();
    if (!at("(")) return leaf("Annotation", name, s);
    take();
    std::vector<NodeId> kids{leaf("Identifier", name, s)};
    if (!at(")")) {
      do {
        if (at_ident() && at("=", 1)) {
          const auto ps = pos_;
          const auto key = leaf("Identifier", take().text, ps);
          take();
          kids.push_back(node("ElementValuePair", {key, element_value()}, ps));
        } else {
          kids.push_back(element_value());
        }
      } while (accept(","));
    }
    expect(")");
    return node("Annotation", kids, s);
  }

  NodeId element_value() {
    if (at("@")) return annotation();
    if (at("{")) {
      const auto s = pos_;
      take();
      std::vector<NodeId> kids;
      while (!at("}")) {
        kids.push_back(element_value());
        if (!accept(",")) break;
      }
      expect("}");
      return node("ElementArrayValue", kids, s);
    }
    return ternary();
  }

  // ---- declarations --------------------------------------------------------

  bool at_type_keyword() const {
    if (at("class") || at("interface") || at("enum")) return true;
    if (at("@") && at("interface", 1)) return true;
    return at_ident() && peek().text == "record" && at_ident(1) && (at("(", 2) || at("<", 2));
  }

  NodeId type_declaration() {
    const auto s = pos_;
    auto mods = modifiers();
    if (!at_type_keyword()) fail("expected type declaration");
    return type_declaration_rest(s, std::move(mods));
  }

  NodeId type_declaration_rest(std::size_t s, std::vector<NodeId> mods) {
    if (accept("class")) {
      const auto ns = pos_;
      mods.push_back(leaf("Identifier", expect_ident(), ns));
      append(mods, type_parameters());
      if (accept("extends")) mods.push_back(type());
      if (accept("implements")) append(mods, type_list());
      if (at_ident() && peek().text == "permits") {
        take();
        append(mods, type_list());
      }
      append(mods, class_body());
      return node("ClassDeclaration", mods, s);
    }
    if (accept("interface")) {
      const auto ns = pos_;
      mods.push_back(leaf("Identifier", expect_ident(), ns));
      append(mods, type_parameters());
      if (accept("extends")) append(mods, type_list());
      if (at_ident() && peek().text == "permits") {
        take();
        append(mods, type_list());
      }
      append(mods, class_body());
      return node("InterfaceDeclaration", mods, s);
    }
    if (accept("enum")) {
      const auto ns = pos_;
      mods.push_back(leaf("Identifier", expect_ident(), ns));
      if (accept("implements")) append(mods, type_list());
      expect("{");
      while (!at(";") && !at("}")) {
        mods.push_back(enum_constant());
        if (!accept(",")) break;
      }
      if (accept(";")) append(mods, class_body_members());
      expect("}");
      return node("EnumDeclaration", mods, s);
    }
    if (at("@")) {
      take();
      expect("interface");
      const auto ns = pos_;
      mods.push_back(leaf("Identifier", expect_ident(), ns));
      append(mods, class_body());
      return node("AnnotationDeclaration", mods, s);
    }
    // record
    take();
    const auto ns = pos_;
    mods.push_back(leaf("Identifier", expect_ident(), ns));
    append(mods, type_parameters());
    append(mods, formal_parameters());
    if (accept("implements")) append(mods, type_list());
    append(mods, class_body());
    return node("RecordDeclaration", mods, s);
  }

  NodeId enum_constant() {
    const auto s = pos_;
    auto kids = modifiers();
    const auto ns = pos_;
    const auto name = expect_ident();
    if (kids.empty() && !at("(") && !at("{")) return leaf("EnumConstantDeclaration", name, s);
    kids.push_back(leaf("Identifier", name, ns));
    if (at("(")) append(kids, arguments());
    if (at("{")) append(kids, class_body());
    return node("EnumConstantDeclaration", kids, s);
  }

  std::vector<NodeId> type_list() {
    std::vector<NodeId> out{type()};
    while (accept(",")) out.push_back(type());
    return out;
  }

  std::vector<NodeId> type_parameters() {
    std::vector<NodeId> out;
    if (!at("<")) return out;
    take();
    do {
      const auto s = pos_;
      auto annots = modifiers();
      const auto name = expect_ident();
      if (!at("extends") && annots.empty()) {
        out.push_back(leaf("TypeParameter", name, s));
        continue;
      }
      std::vector<NodeId> kids = annots;
      kids.push_back(leaf("Identifier", name, s));
      if (accept("extends")) {
        kids.push_back(type());
        while (accept("&")) kids.push_back(type());
      }
      out.push_back(node("TypeParameter", kids, s));
    } while (accept(","));
    expect(">");
    return out;
  }

  std::vector<NodeId> class_body() {
    expect("{");
    auto members = class_body_members();
    expect("}");
    return members;
  }

  std::vector<NodeId> class_body_members() {
    std::vector<NodeId> out;
    while (!at("}") && !at_end()) {
      if (accept(";")) continue;
      out.push_back(member());
    }
    return out;
  }

  NodeId member() {
    const auto s = pos_;
    auto mods = modifiers();
    if (at("{")) {
      take();
      append(mods, block_statements());
      expect("}");
      return node("InitializerBlock", mods, s);
    }
    if (at_type_keyword()) return type_declaration_rest(s, std::move(mods));

    append(mods, type_parameters());
    // Constructor: Name '('
    if (at_ident() && at("(", 1)) {
      const auto ns = pos_;
      mods.push_back(leaf("Identifier", take().text, ns));
      append(mods, formal_parameters());
      append(mods, throws_clause());
      expect("{");
      append(mods, block_statements());
      expect("}");
      return node("ConstructorDeclaration", mods, s);
    }
    // Compact record constructor: Name '{'
    if (at_ident() && at("{", 1)) {
      const auto ns = pos_;
      mods.push_back(leaf("Identifier", take().text, ns));
      take();
      append(mods, block_statements());
      expect("}");
      return node("ConstructorDeclaration", mods, s);
    }
    std::optional<NodeId> ret;
    if (!accept("void")) ret = type();
    const auto ns = pos_;
    const auto name = expect_ident();
    if (at("(")) {
      if (ret) mods.push_back(*ret);
      mods.push_back(leaf("Identifier", name, ns));
      append(mods, formal_parameters());
      while (at("[")) {
        take();
        expect("]");
      }
      append(mods, throws_clause());
      if (accept("default")) mods.push_back(element_value());
      if (at("{")) {
        take();
        append(mods, block_statements());
        expect("}");
      } else {
        expect(";");
      }
      return node("MethodDeclaration", mods, s);
    }
    if (!ret) fail("field cannot have type void");
    mods.push_back(*ret);
    mods.push_back(variable_declarator_rest(name, ns));
    while (accept(",")) {
      const auto ds = pos_;
      mods.push_back(variable_declarator_rest(expect_ident(), ds));
    }
    expect(";");
    return node("FieldDeclaration", mods, s);
  }

  std::vector<NodeId> throws_clause() {
    std::vector<NodeId> out;
    if (!accept("throws")) return out;
    do {
      const auto s = pos_;
      out.push_back(leaf("Throws", qualified_name(), s));
    } while (accept(","));
    return out;
  }

  std::vector<NodeId> formal_parameters() {
    expect("(");
    std::vector<NodeId> out;
    if (!at(")")) {
      do {
        out.push_back(formal_parameter());
      } while (accept(","));
    }
    expect(")");
    return out;
  }

  NodeId formal_parameter() {
    const auto s = pos_;
    auto kids = modifiers();
    kids.push_back(type());
    const bool varargs = accept("...");
    const auto ns = pos_;
    std::string name;
    if (accept("this")) {
      name = "this";
    } else {
      name = expect_ident();
    }
    while (at("[")) {
      take();
      expect("]");
    }
    if (varargs) kids.push_back(leaf("Modifier", "...", ns));
    kids.push_back(leaf("Identifier", name, ns));
    return node("FormalParameter", kids, s);
  }

  NodeId variable_declarator_rest(const std::string& name, std::size_t start) {
    std::vector<NodeId> kids{leaf("Identifier", name, start)};
    while (at("[")) {
      take();
      expect("]");
    }
    if (accept("=")) kids.push_back(variable_initializer());
    return node("VariableDeclarator", kids, start);
  }

  NodeId variable_initializer() { return at("{") ? array_initializer() : expression(); }

  NodeId array_initializer() {
    const auto s = pos_;
    expect("{");
    std::vector<NodeId> kids;
    while (!at("}")) {
      kids.push_back(variable_initializer());
      if (!accept(",")) break;
    }
    expect("}");
    return node("ArrayInitializer", kids, s);
  }

  // ---- types ---------------------------------------------------------------

  std::string dims_suffix() {
    std::string out;
    while (at("[") && at("]", 1)) {
      take();
      take();
      out += "[]";
    }
    return out;
  }

  NodeId type() {
    const auto s = pos_;
    while (at("@")) annotation();  // type annotations are dropped
    if (peek().kind == TokenKind::Keyword && is_primitive(peek().text)) {
      auto name = take().text;
      name += dims_suffix();
      return leaf("BasicType", name, s);
    }
    std::string name = expect_ident();
    std::vector<NodeId> args;
    bool generic = false;
    while (true) {
      if (at("<")) {
        generic = true;
        append(args, type_arguments());
      }
      if (at(".") && (at_ident(1) || at("@", 1))) {
        take();
        while (at("@")) annotation();
        name += "." + expect_ident();
        continue;
      }
      break;
    }
    name += dims_suffix();
    if (!generic || args.empty()) return leaf("ReferenceType", name, s);
    std::vector<NodeId> kids{leaf("Identifier", name, s)};
    append(kids, args);
    return node("ReferenceType", kids, s);
  }

  std::vector<NodeId> type_arguments() {
    expect("<");
    std::vector<NodeId> out;
    if (accept(">")) return out;  // diamond
    do {
      const auto s = pos_;
      while (at("@")) annotation();
      if (accept("?")) {
        if (at("extends") || at("super")) {
          const auto ws = pos_;
          const auto bound = "? " + take().text;
          const auto w = leaf("Wildcard", bound, ws);
          out.push_back(node("TypeArgument", {w, type()}, s));
        } else {
          out.push_back(leaf("TypeArgument", "?", s));
        }
      } else {
        out.push_back(type());
      }
    } while (accept(","));
    expect(">");
    return out;
  }

  // ---- statements ----------------------------------------------------------

  std::vector<NodeId> block_statements() {
    std::vector<NodeId> out;
    while (!at("}") && !at_end()) {
      if (auto st = block_statement()) out.push_back(*st);
    }
    return out;
  }

  NodeId block() {
    const auto s = pos_;
    expect("{");
    auto kids = block_statements();
    expect("}");
    return node("BlockStatement", kids, s);
  }

  bool at_local_var_decl() {
    return lookahead([&] {
      modifiers();
      if (at_ident() && peek().text == "var" && at_ident(1)) {
        take();
      } else {
        type();
      }
      expect_ident();
      if (!(at("=") || at(",") || at(";") || at("[") || at(":"))) fail("not a declaration");
    });
  }

  std::optional<NodeId> block_statement() {
    const auto s = pos_;
    if (at("class") || at("interface") || at("enum") ||
        ((at("abstract") || at("final") || at("static")) &&
         (at("class", 1) || at("interface", 1) || at("enum", 1)))) {
      auto mods = modifiers();
      return type_declaration_rest(s, std::move(mods));
    }
    if (at_ident() && peek().text == "record" && at_ident(1) && at("(", 2)) {
      return type_declaration_rest(s, {});
    }
    if (!at_keyword_statement() && at_local_var_decl()) {
      auto decl = local_variable_declaration("LocalVariableDeclaration");
      expect(";");
      return decl;
    }
    return statement();
  }

  bool at_keyword_statement() const {
    static constexpr std::array<std::string_view, 16> kws = {
        "if",     "while", "for",  "do",     "try",    "switch", "return",       "throw",
        "break", "continue", "assert", "synchronized", "this", "super", "new", "yield"};
    if (peek().kind != TokenKind::Keyword && !(at_ident() && peek().text == "yield")) return false;
    return std::find(kws.begin(), kws.end(), peek().text) != kws.end();
  }

  NodeId local_variable_declaration(const std::string& kind) {
    const auto s = pos_;
    auto kids = modifiers();
    if (at_ident() && peek().text == "var" && at_ident(1)) {
      kids.push_back(leaf("ReferenceType", take().text, s));
    } else {
      kids.push_back(type());
    }
    do {
      const auto ds = pos_;
      kids.push_back(variable_declarator_rest(expect_ident(), ds));
    } while (accept(","));
    return node(kind, kids, s);
  }

  NodeId paren_expression() {
    expect("(");
    auto e = expression();
    expect(")");
    return e;
  }

  NodeId statement() {
    const auto s = pos_;
    if (at("{")) return block();
    if (accept(";")) return leaf("Statement", ";", s);
    if (accept("if")) {
      std::vector<NodeId> kids{paren_expression(), statement()};
      if (accept("else")) kids.push_back(statement());
      return node("IfStatement", kids, s);
    }
    if (accept("while")) {
      auto cond = paren_expression();
      return node("WhileStatement", {cond, statement()}, s);
    }
    if (accept("do")) {
      auto body = statement();
      expect("while");
      auto cond = paren_expression();
      expect(";");
      return node("DoStatement", {body, cond}, s);
    }
    if (accept("for")) return for_statement(s);
    if (accept("try")) return try_statement(s);
    if (accept("switch")) return switch_body("SwitchStatement", s);
    if (accept("return")) {
      std::vector<NodeId> kids;
      if (!at(";")) kids.push_back(expression());
      expect(";");
      return node("ReturnStatement", kids, s);
    }
    if (accept("throw")) {
      auto e = expression();
      expect(";");
      return node("ThrowStatement", {e}, s);
    }
    if (at("break") || at("continue")) {
      const auto kind = take().text == "break" ? "BreakStatement" : "ContinueStatement";
      std::vector<NodeId> kids;
      if (at_ident()) {
        const auto ls = pos_;
        kids.push_back(leaf("Identifier", take().text, ls));
      }
      expect(";");
      return node(kind, kids, s);
    }
    if (accept("assert")) {
      std::vector<NodeId> kids{expression()};
      if (accept(":")) kids.push_back(expression());
      expect(";");
      return node("AssertStatement", kids, s);
    }
    if (at("synchronized") && at("(", 1)) {
      take();
      auto lock = paren_expression();
      return node("SynchronizedStatement", {lock, block()}, s);
    }
    if (at_ident() && peek().text == "yield" && !at("=", 1) && !at(".", 1) && !at("(", 1) &&
        !at("[", 1) && !at("++", 1) && !at("--", 1)) {
      take();
      auto e = expression();
      expect(";");
      return node("YieldStatement", {e}, s);
    }
    if (at_ident() && at(":", 1)) {
      const auto label = leaf("Identifier", take().text, s);
      take();
      return node("LabeledStatement", {label, statement()}, s);
    }
    auto e = expression();
    expect(";");
    return node("StatementExpression", {e}, s);
  }

  NodeId for_statement(std::size_t s) {
    const auto cs = pos_;
    expect("(");
    NodeId control;
    const bool enhanced = lookahead([&] {
      modifiers();
      if (at_ident() && peek().text == "var" && at_ident(1))
        take();
      else
        type();
      expect_ident();
      expect(":");
    });
    if (enhanced) {
      const auto vs = pos_;
      auto vkids = modifiers();
      if (at_ident() && peek().text == "var" && at_ident(1))
        vkids.push_back(leaf("ReferenceType", take().text, vs));
      else
        vkids.push_back(type());
      const auto ds = pos_;
      vkids.push_back(node("VariableDeclarator", {leaf("Identifier", expect_ident(), ds)}, ds));
      const auto var = node("VariableDeclaration", vkids, vs);
      expect(":");
      auto iterable = expression();
      expect(")");
      control = node("EnhancedForControl", {var, iterable}, cs);
    } else {
      std::vector<NodeId> kids;
      if (!at(";")) {
        if (at_local_var_decl()) {
          kids.push_back(local_variable_declaration("VariableDeclaration"));
        } else {
          kids.push_back(expression());
          while (accept(",")) kids.push_back(expression());
        }
      }
      expect(";");
      if (!at(";")) kids.push_back(expression());
      expect(";");
      if (!at(")")) {
        kids.push_back(expression());
        while (accept(",")) kids.push_back(expression());
      }
      expect(")");
      control = node("ForControl", kids, cs);
    }
    return node("ForStatement", {control, statement()}, s);
  }

  NodeId try_statement(std::size_t s) {
    std::vector<NodeId> kids;
    if (accept("(")) {
      while (!at(")")) {
        const auto rs = pos_;
        if (at_local_var_decl()) {
          auto rk = modifiers();
          if (at_ident() && peek().text == "var" && at_ident(1))
            rk.push_back(leaf("ReferenceType", take().text, rs));
          else
            rk.push_back(type());
          const auto ns = pos_;
          rk.push_back(leaf("Identifier", expect_ident(), ns));
          expect("=");
          rk.push_back(expression());
          kids.push_back(node("TryResource", rk, rs));
        } else {
          kids.push_back(node("TryResource", {expression()}, rs));
        }
        if (!accept(";")) break;
      }
      expect(")");
    }
    kids.push_back(block());
    while (at("catch")) {
      const auto cs = pos_;
      take();
      expect("(");
      const auto ps = pos_;
      auto pk = modifiers();
      pk.push_back(type());
      while (accept("|")) pk.push_back(type());
      const auto ns = pos_;
      pk.push_back(leaf("Identifier", expect_ident(), ns));
      const auto param = node("CatchClauseParameter", pk, ps);
      expect(")");
      expect("{");
      std::vector<NodeId> ck{param};
      append(ck, block_statements());
      expect("}");
      kids.push_back(node("CatchClause", ck, cs));
    }
    if (at("finally")) {
      const auto fs = pos_;
      take();
      expect("{");
      auto fk = block_statements();
      expect("}");
      kids.push_back(node("FinallyBlock", fk, fs));
    }
    return node("TryStatement", kids, s);
  }

  // After the 'switch' keyword.
  NodeId switch_body(const std::string& kind, std::size_t s) {
    std::vector<NodeId> kids{paren_expression()};
    expect("{");
    while (!at("}") && !at_end()) {
      const auto cs = pos_;
      std::vector<NodeId> ck;
      if (accept("default")) {
        ck.push_back(leaf("SwitchDefault", "default", cs));
      } else {
        expect("case");
        do {
          if (at("default")) {
            const auto ds = pos_;
            take();
            ck.push_back(leaf("SwitchDefault", "default", ds));
          } else {
            ck.push_back(ternary());
          }
        } while (accept(","));
      }
      if (accept("->")) {
        if (at("{")) {
          ck.push_back(block());
        } else if (at("throw")) {
          ck.push_back(statement());
        } else {
          const auto es = pos_;
          auto e = expression();
          expect(";");
          ck.push_back(node("StatementExpression", {e}, es));
        }
      } else {
        expect(":");
        while (!at("case") && !at("default") && !at("}") && !at_end()) {
          if (auto st = block_statement()) ck.push_back(*st);
        }
        // "default" used as a modifier never appears here, so a following
        // "default:" always starts a new case.
      }
      kids.push_back(node("SwitchStatementCase", ck, cs));
    }
    expect("}");
    return node(kind, kids, s);
  }

  // ---- expressions ---------------------------------------------------------

  // Operator at the current position, combining adjacent '>' tokens into
  // shift and comparison operators. Returns {text, token count}.
  std::pair<std::string, std::size_t> peek_operator() const {
    const auto& t = peek();
    if (t.kind != TokenKind::Operator && !(t.kind == TokenKind::Keyword && t.text == "instanceof"))
      return {"", 0};
    if (t.text != ">") return {t.text, 1};
    std::string op = ">";
    std::size_t n = 1;
    while (n < 3 && peek(n).text == ">" && adjacent(n - 1)) {
      op += ">";
      ++n;
    }
    if (peek(n).text == "=" && adjacent(n - 1)) {
      op += "=";
      ++n;
    }
    return {op, n};
  }

  bool at_lambda() {
    if (at_ident() && at("->", 1)) return true;
    if (!at("(")) return false;
    // find matching ')'
    int depth = 0;
    for (std::size_t k = 0;; ++k) {
      const auto& t = peek(k);
      if (t.kind == TokenKind::End) return false;
      if (t.kind == TokenKind::Operator) {
        if (t.text == "(") ++depth;
        if (t.text == ")" && --depth == 0) return at("->", k + 1);
      }
    }
  }

  NodeId expression() {
    if (at_lambda()) return lambda();
    const auto s = pos_;
    const auto lhs = ternary();
    const auto [op, n] = peek_operator();
    if (n > 0 && is_assignment_op(op)) {
      const auto os = pos_;
      for (std::size_t i = 0; i < n; ++i) take();
      const auto op_leaf = leaf("Operator", op, os);
      const auto rhs = expression();
      return node("Assignment", {op_leaf, lhs, rhs}, s);
    }
    return lhs;
  }

  NodeId lambda() {
    const auto s = pos_;
    std::vector<NodeId> kids;
    if (at_ident()) {
      kids.push_back(leaf("InferredFormalParameter", take().text, s));
    } else {
      expect("(");
      if (!at(")")) {
        if (at_ident() && (at(",", 1) || at(")", 1))) {
          do {
            const auto ps = pos_;
            kids.push_back(leaf("InferredFormalParameter", expect_ident(), ps));
          } while (accept(","));
        } else {
          do {
            kids.push_back(formal_parameter());
          } while (accept(","));
        }
      }
      expect(")");
    }
    expect("->");
    kids.push_back(at("{") ? block() : expression());
    return node("LambdaExpression", kids, s);
  }

  NodeId ternary() {
    const auto s = pos_;
    const auto cond = binary(1);
    if (!accept("?")) return cond;
    const auto a = at_lambda() ? lambda() : ternary_branch();
    expect(":");
    const auto b = at_lambda() ? lambda() : ternary_branch();
    return node("TernaryExpression", {cond, a, b}, s);
  }

  NodeId ternary_branch() { return ternary(); }

  NodeId binary(int min_prec) {
    const auto s = pos_;
    auto left = unary();
    while (true) {
      const auto [op, n] = peek_operator();
      if (n == 0 || is_assignment_op(op)) break;
      const int prec = binary_precedence(op);
      if (prec == 0 || prec < min_prec) break;
      const auto os = pos_;
      for (std::size_t i = 0; i < n; ++i) take();
      const auto op_leaf = leaf("Operator", op, os);
      NodeId right;
      if (op == "instanceof") {
        accept("final");
        right = type();
        if (at_ident() && !at("->", 1)) {
          // pattern matching: `x instanceof Foo f`
          const auto ps = pos_;
          const auto t = right;
          right = node("PatternVariable", {t, leaf("Identifier", take().text, ps)}, ps);
        }
      } else {
        right = binary(prec + 1);
      }
      left = node("BinaryOperation", {op_leaf, left, right}, s);
    }
    return left;
  }

  bool cast_follower() const {
    const auto& t = peek();
    if (t.kind == TokenKind::Identifier || t.kind == TokenKind::Literal) return true;
    if (t.kind == TokenKind::Keyword)
      return t.text == "this" || t.text == "super" || t.text == "new" || t.text == "switch" ||
             is_primitive(t.text);
    return t.text == "(" || t.text == "!" || t.text == "~";
  }

  NodeId unary() {
    const auto s = pos_;
    if (at("+") || at("-") || at("!") || at("~") || at("++") || at("--")) {
      const auto op_leaf = leaf("Operator", take().text, s);
      return node("PrefixOperation", {op_leaf, unary()}, s);
    }
    if (at("(") && !at_lambda()) {
      if (peek(1).kind == TokenKind::Keyword && is_primitive(peek(1).text)) {
        auto cast = attempt([&] {
          take();
          const auto t = type();
          expect(")");
          return t;
        });
        if (cast) return node("Cast", {*cast, unary()}, s);
      } else {
        auto cast = attempt([&] {
          take();
          std::vector<NodeId> types{type()};
          while (accept("&")) types.push_back(type());
          expect(")");
          if (!cast_follower()) fail("not a cast");
          return types;
        });
        if (cast) {
          auto kids = *cast;
          kids.push_back(at_lambda() ? lambda() : unary());
          return node("Cast", kids, s);
        }
      }
    }
    auto e = postfix(primary());
    while (at("++") || at("--")) {
      const auto os = pos_;
      const auto op_leaf = leaf("Operator", take().text, os);
      e = node("PostfixOperation", {e, op_leaf}, s);
    }
    return e;
  }

  std::vector<NodeId> arguments() {
    expect("(");
    std::vector<NodeId> out;
    if (!at(")")) {
      do {
        out.push_back(expression());
      } while (accept(","));
    }
    expect(")");
    return out;
  }

  void skip_type_arguments() {
    if (at("<")) type_arguments();
  }

  NodeId primary() {
    const auto s = pos_;
    const auto& t = peek();
    if (t.kind == TokenKind::Literal) return leaf("Literal", take().text, s);
    if (at("(")) return paren_expression();
    if (at("new")) return creator();
    if (at("switch")) {
      take();
      return switch_body("SwitchExpression", s);
    }
    if (at("super")) {
      take();
      if (at("(")) return node("SuperConstructorInvocation", arguments(), s);
      if (accept("::")) {
        const auto ns = pos_;
        const auto name = at("new") ? take().text : expect_ident();
        return node("MethodReference", {leaf("Identifier", "super", s), leaf("Identifier", name, ns)}, s);
      }
      expect(".");
      skip_type_arguments();
      const auto ns = pos_;
      const auto name = expect_ident();
      if (at("(")) {
        std::vector<NodeId> kids{leaf("Identifier", name, ns)};
        append(kids, arguments());
        return node("SuperMethodInvocation", kids, s);
      }
      return leaf("SuperMemberReference", name, s);
    }
    if (t.kind == TokenKind::Keyword && (is_primitive(t.text) || t.text == "void")) {
      std::string name = take().text;
      name += dims_suffix();
      if (accept("::")) {
        const auto ns = pos_;
        const auto member = at("new") ? take().text : expect_ident();
        return node("MethodReference", {leaf("BasicType", name, s), leaf("Identifier", member, ns)}, s);
      }
      expect(".");
      expect("class");
      return leaf("ClassReference", name, s);
    }
    if (at("this") || at_ident()) return name_chain();
    if (at("@")) {
      annotation();  // annotated expression type; drop the annotation
      return primary();
    }
    fail("expected expression");
  }

  // identifier ('.' identifier)* with the trailing forms that only make
  // sense on a dotted name: invocation, class literal, method reference.
  NodeId name_chain() {
    const auto s = pos_;
    std::vector<std::string> parts{take().text};
    if (parts[0] == "this" && at("(")) return node("ExplicitConstructorInvocation", arguments(), s);
    while (at(".") && (at_ident(1) || at("this", 1))) {
      take();
      parts.push_back(take().text);
      if (parts.back() == "this") break;
    }
    auto join = [&](std::size_t n) {
      std::string out;
      for (std::size_t i = 0; i < n; ++i) out += (i ? "." : "") + parts[i];
      return out;
    };
    if (parts.size() == 1 && parts[0] == "this" && !at("::")) return leaf("This", "this", s);
    if (at("(") && parts.back() != "this") {
      std::vector<NodeId> kids;
      if (parts.size() > 1) kids.push_back(leaf("Qualifier", join(parts.size() - 1), s));
      kids.push_back(leaf("Identifier", parts.back(), s));
      append(kids, arguments());
      return node("MethodInvocation", kids, s);
    }
    if (at(".") && at("<", 1)) {
      // explicit generic invocation: a.b.<T>c(...)
      take();
      skip_type_arguments();
      const auto ns = pos_;
      const auto name = expect_ident();
      std::vector<NodeId> kids{leaf("Qualifier", join(parts.size()), s), leaf("Identifier", name, ns)};
      append(kids, arguments());
      return node("MethodInvocation", kids, s);
    }
    if (at(".") && at("class", 1)) {
      take();
      take();
      return leaf("ClassReference", join(parts.size()), s);
    }
    if (at("[") && at("]", 1)) {
      auto name = join(parts.size()) + dims_suffix();
      if (accept("::")) {
        const auto ns = pos_;
        const auto member = at("new") ? take().text : expect_ident();
        return node("MethodReference", {leaf("ReferenceType", name, s), leaf("Identifier", member, ns)}, s);
      }
      expect(".");
      expect("class");
      return leaf("ClassReference", name, s);
    }
    if (at("<") && lookahead([&] {
          type_arguments();
          expect("::");
        })) {
      skip_type_arguments();
    }
    return leaf(parts.back() == "this" ? "This" : "MemberReference", join(parts.size()), s);
  }

  NodeId postfix(NodeId target) {
    const auto s = pos_;
    while (true) {
      if (at(".") && (at_ident(1) || at("<", 1))) {
        take();
        skip_type_arguments();
        const auto ns = pos_;
        const auto name = leaf("Identifier", expect_ident(), ns);
        if (at("(")) {
          std::vector<NodeId> kids{target, name};
          append(kids, arguments());
          target = node("MethodInvocation", kids, s);
        } else {
          target = node("FieldAccess", {target, name}, s);
        }
      } else if (at(".") && at("new", 1)) {
        take();
        target = node("InnerClassCreator", {target, creator()}, s);
      } else if (at("[")) {
        take();
        auto idx = expression();
        expect("]");
        target = node("ArraySelector", {target, idx}, s);
      } else if (at("::")) {
        take();
        const auto ns = pos_;
        const auto name = at("new") ? take().text : expect_ident();
        target = node("MethodReference", {target, leaf("Identifier", name, ns)}, s);
      } else {
        return target;
      }
    }
  }

  NodeId creator() {
    const auto s = pos_;
    expect("new");
    skip_type_arguments();
    const auto ts = pos_;
    NodeId created;
    if (peek().kind == TokenKind::Keyword && is_primitive(peek().text)) {
      created = leaf("BasicType", take().text, ts);
    } else {
      while (at("@")) annotation();
      std::string name = expect_ident();
      std::vector<NodeId> args;
      bool generic = false;
      while (true) {
        if (at("<")) {
          generic = true;
          append(args, type_arguments());
        }
        if (at(".") && at_ident(1)) {
          take();
          name += "." + take().text;
          continue;
        }
        break;
      }
      if (generic && !args.empty()) {
        std::vector<NodeId> kids{leaf("Identifier", name, ts)};
        append(kids, args);
        created = node("ReferenceType", kids, ts);
      } else {
        created = leaf("ReferenceType", name, ts);
      }
    }
    if (at("[")) {
      std::vector<NodeId> kids{created};
      while (at("[")) {
        take();
        if (accept("]")) continue;
        kids.push_back(expression());
        expect("]");
      }
      if (at("{")) kids.push_back(array_initializer());
      return node("ArrayCreator", kids, s);
    }
    std::vector<NodeId> kids{created};
    append(kids, arguments());
    if (at("{")) append(kids, class_body());
    return node("ClassCreator", kids, s);
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  SyntaxTree tree_;
};

}  // namespace

SyntaxTree parse_java(std::string_view source) { return Parser(source).run(); }

CodeGraph parse_ast(std::string_view source, std::string path) {
  return tree_to_graph(parse_java(source), std::move(path), ParseDepth::File);
}

}  // namespace perfal::fa_ast
