#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "perfal/code_graph.hpp"

namespace perfal::fa_ast {

class ParseError : public Error {
 public:
  ParseError(const std::string& msg, int line, int column)
      : Error(msg + " at " + std::to_string(line) + ":" + std::to_string(column)),
        line_(line),
        column_(column) {}

  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

enum class TokenKind { Identifier, Keyword, Literal, Operator, End };

struct Token {
  TokenKind kind = TokenKind::End;
  std::string text;
  int line = 1;
  int column = 1;
  std::size_t begin = 0;  // byte offsets into the source
  std::size_t end = 0;
};

/// Tokenize Java source. Comments are skipped; '>' is always emitted as a
/// single-character token so that nested generics close cleanly.
std::vector<Token> tokenize(std::string_view source);

/// Remove line and block comments while leaving string, character and text
/// block literals untouched. Newlines inside block comments are kept so line
/// numbers survive; a comment between two identifier characters becomes a
/// single space.
std::string strip_comments(std::string_view source);

/// Parse one compilation unit into an ordered syntax tree.
SyntaxTree parse_java(std::string_view source);

/// parse_java + tree_to_graph; the result carries AST edges only.
CodeGraph parse_ast(std::string_view source, std::string path);

}  // namespace perfal::fa_ast
