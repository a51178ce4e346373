#ifndef ROC_EXPRLANG_HPP
#define ROC_EXPRLANG_HPP

// Minimal arithmetic expression language for user-defined energies:
// real literals, named variables, + - * / ^, unary minus and the
// functions log, exp, sqrt, abs, min, max, pow. Precedence is
// ^ (right-associative) > unary minus > * / > + -. No implicit
// multiplication, no unicode identifiers. Parsed expressions are
// immutable and safe to share across threads; evaluation is pure.

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "roc/errors.hpp"

namespace roc {

struct ParseError : InputError {
  std::size_t offset;
  std::string expected;
  ParseError(const std::string& msg, std::size_t off, std::string exp)
      : InputError(msg), offset(off), expected(std::move(exp)) {}
};

namespace detail {
struct ExprNode;
}

// Expression with variables resolved to slot indices; evaluation takes
// the slot values positionally. This is the hot path used by energy
// evaluators.
class BoundExpr {
 public:
  double eval(std::span<const double> values) const;
  int slot_count() const { return slots_; }

  struct Instr {
    int op;
    double k;
    int slot;
    const detail::ExprNode* src;
  };

 private:
  friend class Expr;
  std::vector<Instr> prog_;
  std::shared_ptr<const detail::ExprNode> root_;  // keeps error context alive
  std::string source_;
  int slots_ = 0;
  int max_depth_ = 0;
};

class Expr {
 public:
  // Parses with standard precedence; reports syntax errors with byte
  // offsets and the expected-token set, and rejects unknown functions.
  static Expr parse(std::string_view source);

  // Evaluation against named bindings. log/sqrt of non-positive
  // arguments raise DomainError (never NaN), carrying the offending
  // sub-expression.
  double eval(std::span<const std::string> names, std::span<const double> values) const;

  // Resolves the variables against the given name list once; names not
  // in the list raise EvalError.
  BoundExpr bind(std::span<const std::string> names) const;

  std::string pretty() const;
  bool same_structure(const Expr& other) const;
  std::vector<std::string> variables() const;  // in first-appearance order

 private:
  std::shared_ptr<const detail::ExprNode> root_;
  std::string source_;
};

}  // namespace roc

#endif
