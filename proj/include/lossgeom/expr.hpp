#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>

namespace lossgeom::dsl {

// Arithmetic expressions in one variable p.  Grammar:
//
//   spec    := "lambda0" "=" expr ";" "lambda1" "=" expr [";"]
//   expr    := term (("+"|"-") term)*
//   term    := factor (("*"|"/") factor)*
//   factor  := unary ("^" factor)?        right-associative power
//   unary   := "-" unary | atom
//   atom    := number | "p" | func "(" expr ")" | "(" expr ")"
//   func    := "ln" | "exp" | "sqrt" | "abs"
//
// Whitespace is insignificant.  "^" with a non-integer exponent is defined
// only for a nonnegative base (IEEE pow semantics: NaN otherwise).

enum class Op {
  number,
  var_p,
  neg,
  add,
  sub,
  mul,
  div,
  pow,
  fn_ln,
  fn_exp,
  fn_sqrt,
  fn_abs,
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  Op op;
  double number = 0.0;  // valid when op == Op::number
  ExprPtr lhs, rhs;     // unary ops and functions use lhs only
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, size_t position)
      : std::runtime_error(message + " (at offset " + std::to_string(position) + ")"),
        position_(position) {}
  size_t position() const { return position_; }

 private:
  size_t position_;
};

struct LossSpec {
  ExprPtr lambda0;
  ExprPtr lambda1;
};

// Parses a full "lambda0 = ...; lambda1 = ..." specification.
LossSpec parse_loss_spec(std::string_view text);

// Parses a single expression (the whole string must be consumed).
ExprPtr parse_expression(std::string_view text);

double eval(const Expr& e, double p);

// Prints with minimal parentheses; parse_expression(to_string(e)) is
// structurally identical to e.
std::string to_string(const Expr& e);

bool structurally_equal(const Expr& a, const Expr& b);

}  // namespace lossgeom::dsl
