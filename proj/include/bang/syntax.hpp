#ifndef BANG_SYNTAX_HPP
#define BANG_SYNTAX_HPP

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "bang/term.hpp"

namespace bang {

struct SourceSpan {
  size_t start = 0;  // byte offsets
  size_t end = 0;
  int line = 1;
  int column = 1;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::string msg, SourceSpan span)
      : std::runtime_error(std::move(msg)), span(span) {}
  SourceSpan span;
};

/// Grammar:
///   tensor   := "1" | factor+
///   factor   := "id" "(" "+"name "-"name ")"
///             | "circle"
///             | symbol "(" edgeterm ")"
///             | "[" tensor? "]" boxname
///   edgeterm := item*
///   item     := "+"name | "-"name | "[" edgeterm ">" boxname
///             | "<" edgeterm "]" boxname
/// Names are nonempty runs of letters, digits, underscore, apostrophe, dot.
PreTensor parse_tensor(const std::string& text);

/// Deterministic single-space-separated rendering. parse(print(t)) == t.
std::string print_tensor(const PreTensor& t);
std::string print_tensor(const Tensor& t);
std::string print_edgeterm(const EdgeTerm& e);

// -- theory files ------------------------------------------------------------

struct TheoryRule {
  std::string name;
  std::string lhs_src;
  std::string rhs_src;
  SourceSpan span;
  bool is_lemma = false;  // lemmas need a proof before use
};

struct TheoryFile {
  std::string name;
  Signature signature;
  std::vector<TheoryRule> rules;  // rules and lemmas, in file order
};

/// Line-oriented `.bt` file:
///   theory <name>
///   sym <name> : var | <word over ^ v>
///   rule <name>: <tensor> = <tensor>
///   lemma <name>: <tensor> = <tensor>
/// `#` starts a comment.
TheoryFile parse_theory(const std::string& text);

// -- JSON / DOT export -------------------------------------------------------

/// Lossless AST export; schema documented in the README.
std::string export_json(const Tensor& t);
std::string export_json(const PreTensor& t);

/// Re-importer for the JSON schema (inverse of export_json).
PreTensor import_json(const std::string& text);

/// Lossy rendering: atoms as nodes, bound pairs as edges, !-boxes as
/// clusters, group direction as an edge attribute.
std::string export_dot(const Tensor& t);

}  // namespace bang

#endif  // BANG_SYNTAX_HPP
