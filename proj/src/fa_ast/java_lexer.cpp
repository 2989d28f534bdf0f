#include <algorithm>
#include <array>
#include <cctype>
#include <string_view>

#include "perfal/java.hpp"

namespace perfal::fa_ast {

namespace {

constexpr std::array<std::string_view, 53> kKeywords = {
    "abstract", "assert",     "boolean",   "break",     "byte",      "case",      "catch",
    "char",     "class",      "const",     "continue",  "default",   "do",        "double",
    "else",     "enum",       "extends",   "final",     "finally",   "float",     "for",
    "goto",     "if",         "implements", "import",   "instanceof", "int",      "interface",
    "long",     "native",     "new",       "package",   "private",   "protected", "public",
    "return",   "short",      "static",    "strictfp",  "super",     "switch",    "synchronized",
    "this",     "throw",      "throws",    "transient", "try",       "void",      "volatile",
    "while",    "true",       "false",     "null"};

// Longest-match order matters: longer operators first. '>' is deliberately
// absent from every multi-character entry.
constexpr std::array<std::string_view, 38> kOperators = {
    "<<=", "...", "->", "::", "++", "--", "&&", "||", "==", "!=", "<=", "<<", "+=",
    "-=",  "*=",  "/=", "&=", "|=", "^=", "%=", "(",  ")",  "{",  "}",  "[",  "]",
    ";",   ",",   ".",  "@",  "=",  "<",  ">",  "!",  "~",  "?",  ":",  "+"};

constexpr std::string_view kSingleOps = "-*/&|^%";

bool ident_start(unsigned char c) { return std::isalpha(c) || c == '_' || c == '$' || c >= 0x80; }
bool ident_part(unsigned char c) { return std::isalnum(c) || c == '_' || c == '$' || c >= 0x80; }

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skip_space_and_comments();
      if (pos_ >= src_.size()) break;
      out.push_back(next());
    }
    Token end;
    end.kind = TokenKind::End;
    end.line = line_;
    end.column = column();
    end.begin = end.end = src_.size();
    out.push_back(end);
    return out;
  }

 private:
  int column() const { return static_cast<int>(pos_ - line_start_) + 1; }

  void advance(std::size_t n = 1) {
    for (std::size_t i = 0; i < n && pos_ < src_.size(); ++i) {
      if (src_[pos_] == '\n') {
        ++line_;
        line_start_ = pos_ + 1;
      }
      ++pos_;
    }
  }

  char at(std::size_t off = 0) const { return pos_ + off < src_.size() ? src_[pos_ + off] : '\0'; }

  void skip_space_and_comments() {
    while (pos_ < src_.size()) {
      const char c = at();
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else if (c == '/' && at(1) == '/') {
        while (pos_ < src_.size() && at() != '\n') advance();
      } else if (c == '/' && at(1) == '*') {
        const int line = line_, col = column();
        advance(2);
        while (pos_ < src_.size() && !(at() == '*' && at(1) == '/')) advance();
        if (pos_ >= src_.size()) throw ParseError("unterminated block comment", line, col);
        advance(2);
      } else {
        break;
      }
    }
  }

  Token next() {
    Token t;
    t.line = line_;
    t.column = column();
    t.begin = pos_;
    const auto c = static_cast<unsigned char>(at());

    if (ident_start(c)) {
      while (pos_ < src_.size() && ident_part(static_cast<unsigned char>(at()))) advance();
      t.text = std::string(src_.substr(t.begin, pos_ - t.begin));
      const bool kw = std::find(kKeywords.begin(), kKeywords.end(), t.text) != kKeywords.end();
      t.kind = kw ? TokenKind::Keyword : TokenKind::Identifier;
      if (t.text == "true" || t.text == "false" || t.text == "null") t.kind = TokenKind::Literal;
    } else if (std::isdigit(c) || (c == '.' && std::isdigit(static_cast<unsigned char>(at(1))))) {
      lex_number();
      t.kind = TokenKind::Literal;
      t.text = std::string(src_.substr(t.begin, pos_ - t.begin));
    } else if (c == '"') {
      if (at(1) == '"' && at(2) == '"')
        lex_text_block(t);
      else
        lex_quoted('"', t);
      t.kind = TokenKind::Literal;
      t.text = std::string(src_.substr(t.begin, pos_ - t.begin));
    } else if (c == '\'') {
      lex_quoted('\'', t);
      t.kind = TokenKind::Literal;
      t.text = std::string(src_.substr(t.begin, pos_ - t.begin));
    } else {
      t.kind = TokenKind::Operator;
      const auto rest = src_.substr(pos_);
      for (auto op : kOperators) {
        if (rest.starts_with(op)) {
          t.text = std::string(op);
          break;
        }
      }
      if (t.text.empty()) {
        if (kSingleOps.find(static_cast<char>(c)) == std::string_view::npos)
          throw ParseError(std::string("unexpected character '") + static_cast<char>(c) + "'", t.line, t.column);
        t.text = std::string(1, static_cast<char>(c));
      }
      advance(t.text.size());
    }
    t.end = pos_;
    return t;
  }

  void lex_number() {
    if (at() == '0' && (at(1) == 'x' || at(1) == 'X' || at(1) == 'b' || at(1) == 'B')) {
      advance(2);
      while (std::isxdigit(static_cast<unsigned char>(at())) || at() == '_') advance();
      if (at() == 'l' || at() == 'L') advance();
      return;
    }
    auto digits = [&] {
      while (std::isdigit(static_cast<unsigned char>(at())) || at() == '_') advance();
    };
    digits();
    if (at() == '.' && std::isdigit(static_cast<unsigned char>(at(1)))) {
      advance();
      digits();
    } else if (at() == '.' && !ident_start(static_cast<unsigned char>(at(1))) && at(1) != '.') {
      advance();  // "1." is a valid double literal
    }
    if (at() == 'e' || at() == 'E') {
      advance();
      if (at() == '+' || at() == '-') advance();
      digits();
    }
    if (std::string_view("lLfFdD").find(at()) != std::string_view::npos && at() != '\0') advance();
  }

  void lex_quoted(char quote, const Token& t) {
    advance();
    while (pos_ < src_.size() && at() != quote) {
      if (at() == '\n') throw ParseError("unterminated literal", t.line, t.column);
      if (at() == '\\') advance();
      advance();
    }
    if (pos_ >= src_.size()) throw ParseError("unterminated literal", t.line, t.column);
    advance();
  }

  void lex_text_block(const Token& t) {
    advance(3);
    while (pos_ < src_.size() && !(at() == '"' && at(1) == '"' && at(2) == '"')) {
      if (at() == '\\') advance();
      advance();
    }
    if (pos_ >= src_.size()) throw ParseError("unterminated text block", t.line, t.column);
    advance(3);
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::size_t line_start_ = 0;
  int line_ = 1;
};

}  // namespace

std::vector<Token> tokenize(std::string_view source) { return Lexer(source).run(); }

std::string strip_comments(std::string_view src) {
  std::string out;
  out.reserve(src.size());
  std::size_t i = 0;
  const auto n = src.size();
  auto copy_literal = [&](char quote) {
    out.push_back(src[i++]);
    while (i < n && src[i] != quote && src[i] != '\n') {
      if (src[i] == '\\' && i + 1 < n) out.push_back(src[i++]);
      out.push_back(src[i++]);
    }
    if (i < n && src[i] == quote) out.push_back(src[i++]);
  };
  auto needs_gap = [&](std::size_t after) {
    if (out.empty() || after >= n) return false;
    return ident_part(static_cast<unsigned char>(out.back())) && ident_part(static_cast<unsigned char>(src[after]));
  };
  while (i < n) {
    const char c = src[i];
    if (c == '"' && i + 2 < n && src[i + 1] == '"' && src[i + 2] == '"') {
      const auto close = src.find("\"\"\"", i + 3);
      const auto stop = close == std::string_view::npos ? n : close + 3;
      out.append(src.substr(i, stop - i));
      i = stop;
    } else if (c == '"' || c == '\'') {
      copy_literal(c);
    } else if (c == '/' && i + 1 < n && src[i + 1] == '/') {
      while (i < n && src[i] != '\n') ++i;
    } else if (c == '/' && i + 1 < n && src[i + 1] == '*') {
      const auto close = src.find("*/", i + 2);
      if (close == std::string_view::npos) {
        // Unterminated comment: pass the remainder through untouched.
        out.append(src.substr(i));
        break;
      }
      const auto body = src.substr(i, close + 2 - i);
      const auto newlines = std::count(body.begin(), body.end(), '\n');
      i = close + 2;
      if (newlines > 0)
        out.append(static_cast<std::size_t>(newlines), '\n');
      else if (needs_gap(i))
        out.push_back(' ');
    } else {
      out.push_back(c);
      ++i;
    }
  }
  return out;
}

}  // namespace perfal::fa_ast
