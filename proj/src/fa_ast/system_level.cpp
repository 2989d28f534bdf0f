#include <algorithm>
#include <set>

#include "perfal/fa_ast.hpp"

namespace perfal::fa_ast {

namespace {

bool is_type_decl(std::string_view k) {
  return k == "ClassDeclaration" || k == "InterfaceDeclaration" || k == "EnumDeclaration" ||
         k == "RecordDeclaration" || k == "AnnotationDeclaration";
}

std::optional<std::string> identifier_child(const SyntaxTree& t, std::size_t v) {
  for (auto c : t[v].children)
    if (t[c].kind == "Identifier" && t[c].token) return *t[c].token;
  return std::nullopt;
}

std::string strip_type_name(std::string name) {
  if (auto p = name.find('['); p != std::string::npos) name.resize(p);
  if (auto p = name.rfind('.'); p != std::string::npos) name = name.substr(p + 1);
  return name;
}

std::string segment(const std::string& dotted, std::size_t from_end) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto dot = dotted.find('.', start);
    parts.push_back(dotted.substr(start, dot - start));
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  if (from_end >= parts.size()) return {};
  return parts[parts.size() - 1 - from_end];
}

using NodeRef = std::pair<std::size_t, std::size_t>;  // (graph, tree node)

class Inliner {
 public:
  Inliner(const DeclarationIndex& index, std::size_t home) : index_(index), home_(home) {
    // Everything declared in the home file is already present.
    mark_declarations(home, index.tree(home).root());
  }

  SystemGraph run() {
    const auto& src = index_.tree(home_);
    const auto root = copy(home_, src.root(), "", 0);
    out_.set_root(root);
    SystemGraph result;
    result.graph = augment_flow(tree_to_graph(out_, index_.corpus()[home_].path, ParseDepth::System));
    result.cycles = std::move(cycles_);
    return result;
  }

 private:
  void mark_declarations(std::size_t graph, std::size_t v) {
    const auto& t = index_.tree(graph);
    std::vector<std::size_t> stack{v};
    while (!stack.empty()) {
      const auto u = stack.back();
      stack.pop_back();
      const auto& k = t[u].kind;
      if (is_type_decl(k) || k == "MethodDeclaration" || k == "ConstructorDeclaration") inlined_.insert({graph, u});
      for (auto c : t[u].children) stack.push_back(c);
    }
  }

  // Declaration targeted by a terminal, given how its parent uses it.
  std::optional<DeclarationIndex::Location> target_of(const SyntaxTree& t, std::size_t v, std::string_view parent_kind,
                                                      std::size_t arity, bool is_member_name) const {
    const auto& n = t[v];
    if (!n.token) return std::nullopt;
    const auto& text = *n.token;
    if (n.kind == "Identifier" && is_member_name && parent_kind == "MethodInvocation")
      return index_.find_method(text, arity);
    if (n.kind == "ReferenceType" || n.kind == "ClassReference" ||
        (n.kind == "Identifier" && parent_kind == "ReferenceType"))
      return index_.find_type(strip_type_name(text));
    if (n.kind == "Qualifier") return index_.find_type(segment(text, 0));
    if (n.kind == "MemberReference" && text.find('.') != std::string::npos)
      return index_.find_type(segment(text, 1));
    return std::nullopt;
  }

  std::size_t copy_leaf(const SyntaxTree::Node& n) { return out_.add(n.kind, n.token, n.span); }

  std::size_t copy(std::size_t graph, std::size_t v, std::string_view parent_kind, std::size_t arity,
                   bool is_member_name = false) {
    const auto& t = index_.tree(graph);
    const auto& n = t[v];
    if (n.children.empty()) {
      auto target = target_of(t, v, parent_kind, arity, is_member_name);
      if (!target || target->graph == home_) return copy_leaf(n);
      const NodeRef ref{target->graph, static_cast<std::size_t>(target->node)};
      if (std::find(stack_.begin(), stack_.end(), ref) != stack_.end()) {
        cycles_.push_back({stack_labels_.back(), target->label});
        return copy_leaf(n);
      }
      if (inlined_.count(ref)) return copy_leaf(n);
      mark_declarations(ref.first, ref.second);
      stack_.push_back(ref);
      stack_labels_.push_back(target->label);
      const auto leaf = copy_leaf(n);
      const auto body = copy(ref.first, ref.second, "", 0);
      stack_.pop_back();
      stack_labels_.pop_back();
      const auto wrapper = out_.add("ResolvedReference", std::nullopt, n.span);
      out_.append_child(wrapper, leaf);
      out_.append_child(wrapper, body);
      return wrapper;
    }

    // Member name of an invocation: first Identifier child; arity counts what follows.
    std::optional<std::size_t> member_pos;
    if (n.kind == "MethodInvocation") {
      for (std::size_t i = 0; i < n.children.size(); ++i)
        if (t[n.children[i]].kind == "Identifier") {
          member_pos = i;
          break;
        }
    }
    std::vector<std::size_t> kids;
    kids.reserve(n.children.size());
    for (std::size_t i = 0; i < n.children.size(); ++i) {
      const bool member = member_pos && *member_pos == i;
      const std::size_t call_arity = member ? n.children.size() - i - 1 : 0;
      kids.push_back(copy(graph, n.children[i], n.kind, call_arity, member));
    }
    const auto id = out_.add(n.kind, n.token, n.span);
    for (auto k : kids) out_.append_child(id, k);
    return id;
  }

  const DeclarationIndex& index_;
  std::size_t home_;
  SyntaxTree out_;
  std::set<NodeRef> inlined_;
  std::vector<NodeRef> stack_;
  std::vector<std::string> stack_labels_;
  std::vector<ResolutionCycle> cycles_;
};

}  // namespace

DeclarationIndex::DeclarationIndex(const std::vector<CodeGraph>& corpus) : corpus_(&corpus) {
  trees_.reserve(corpus.size());
  for (std::size_t gi = 0; gi < corpus.size(); ++gi) {
    trees_.push_back(graph_to_tree(ast_only(corpus[gi])));
    const auto& t = trees_.back();
    if (t.size() == 0) continue;
    std::vector<std::size_t> stack{t.root()};
    while (!stack.empty()) {
      const auto v = stack.back();
      stack.pop_back();
      const auto& n = t[v];
      if (n.kind == "MethodDeclaration") {
        if (auto name = identifier_child(t, v)) {
          const auto arity = static_cast<std::size_t>(std::count_if(
              n.children.begin(), n.children.end(), [&](std::size_t c) { return t[c].kind == "FormalParameter"; }));
          methods_.try_emplace({*name, arity},
                               Location{gi, static_cast<int>(v), "method " + *name + "/" + std::to_string(arity)});
        }
      } else if (is_type_decl(n.kind)) {
        if (auto name = identifier_child(t, v)) types_.try_emplace(*name, Location{gi, static_cast<int>(v), "type " + *name});
      }
      for (auto it = n.children.rbegin(); it != n.children.rend(); ++it) stack.push_back(*it);
    }
  }
}

std::optional<DeclarationIndex::Location> DeclarationIndex::find_method(const std::string& name,
                                                                        std::size_t arity) const {
  auto it = methods_.find({name, arity});
  if (it == methods_.end()) return std::nullopt;
  return it->second;
}

std::optional<DeclarationIndex::Location> DeclarationIndex::find_type(const std::string& name) const {
  auto it = types_.find(name);
  if (it == types_.end()) return std::nullopt;
  return it->second;
}

SystemGraph resolve_system_level(const DeclarationIndex& index, std::size_t graph_index) {
  if (graph_index >= index.corpus().size()) throw Error("graph index out of range");
  return Inliner(index, graph_index).run();
}

SystemGraph resolve_system_level(const std::vector<CodeGraph>& corpus, std::size_t graph_index) {
  const DeclarationIndex index(corpus);
  return resolve_system_level(index, graph_index);
}

// ---- vocabulary ------------------------------------------------------------

Vocabulary::Vocabulary(std::vector<Key> keys) : keys_(std::move(keys)) {
  for (std::size_t i = 0; i < keys_.size(); ++i) index_.emplace(keys_[i], i);
}

std::optional<std::size_t> Vocabulary::find(const std::string& kind, const std::optional<std::string>& token) const {
  auto it = index_.find(Key{kind, token});
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t Vocabulary::id(const AstNode& n) const {
  auto found = find(n.kind, n.token);
  if (!found) throw Error("node (" + n.kind + ", " + n.token.value_or("<none>") + ") is not in the vocabulary");
  return *found;
}

Vocabulary build_vocabulary(const std::vector<CodeGraph>& corpus) {
  if (corpus.empty()) throw ConfigError("cannot build a vocabulary from an empty corpus");
  std::set<Vocabulary::Key> keys;
  for (const auto& g : corpus)
    for (const auto& n : g.nodes) keys.emplace(n.kind, n.token);
  return Vocabulary(std::vector<Vocabulary::Key>(keys.begin(), keys.end()));
}

}  // namespace perfal::fa_ast
