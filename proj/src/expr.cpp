#include "lossgeom/expr.hpp"

#include <charconv>
#include <cmath>
#include <cstring>

namespace lossgeom::dsl {

namespace {

ExprPtr make(Op op, ExprPtr lhs = nullptr, ExprPtr rhs = nullptr) {
  auto e = std::make_shared<Expr>();
  e->op = op;
  e->lhs = std::move(lhs);
  e->rhs = std::move(rhs);
  return e;
}

ExprPtr make_number(double v) {
  auto e = std::make_shared<Expr>();
  e->op = Op::number;
  e->number = v;
  return e;
}

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  ExprPtr parse_whole_expression() {
    ExprPtr e = parse_expr();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return e;
  }

  LossSpec parse_spec() {
    expect_keyword("lambda0");
    expect_char('=');
    ExprPtr l0 = parse_expr();
    expect_char(';');
    expect_keyword("lambda1");
    expect_char('=');
    ExprPtr l1 = parse_expr();
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == ';') ++pos_;
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return {std::move(l0), std::move(l1)};
  }

 private:
  [[noreturn]] void fail(const std::string& msg) { throw ParseError(msg, pos_); }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool try_char(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect_char(char c) {
    if (!try_char(c)) fail(std::string("expected '") + c + "'");
  }

  void expect_keyword(std::string_view kw) {
    skip_ws();
    if (text_.substr(pos_, kw.size()) != kw) fail("expected '" + std::string(kw) + "'");
    pos_ += kw.size();
  }

  std::string read_identifier() {
    skip_ws();
    size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalpha(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      ++pos_;
    }
    return std::string(text_.substr(start, pos_ - start));
  }

  ExprPtr parse_expr() {
    ExprPtr e = parse_term();
    for (;;) {
      if (try_char('+')) {
        e = make(Op::add, e, parse_term());
      } else if (try_char('-')) {
        e = make(Op::sub, e, parse_term());
      } else {
        return e;
      }
    }
  }

  ExprPtr parse_term() {
    ExprPtr e = parse_factor();
    for (;;) {
      if (try_char('*')) {
        e = make(Op::mul, e, parse_factor());
      } else if (try_char('/')) {
        e = make(Op::div, e, parse_factor());
      } else {
        return e;
      }
    }
  }

  ExprPtr parse_factor() {
    ExprPtr base = parse_unary();
    if (try_char('^')) return make(Op::pow, base, parse_factor());
    return base;
  }

  ExprPtr parse_unary() {
    if (try_char('-')) return make(Op::neg, parse_unary());
    return parse_atom();
  }

  ExprPtr parse_atom() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      ExprPtr e = parse_expr();
      expect_char(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c))) {
      size_t start = pos_;
      std::string id = read_identifier();
      if (id == "p") return make(Op::var_p);
      Op fn;
      if (id == "ln") {
        fn = Op::fn_ln;
      } else if (id == "exp") {
        fn = Op::fn_exp;
      } else if (id == "sqrt") {
        fn = Op::fn_sqrt;
      } else if (id == "abs") {
        fn = Op::fn_abs;
      } else {
        pos_ = start;
        fail("unknown identifier '" + id + "'");
      }
      expect_char('(');
      ExprPtr arg = parse_expr();
      expect_char(')');
      return make(fn, arg);
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  ExprPtr parse_number() {
    const char* begin = text_.data() + pos_;
    const char* end = text_.data() + text_.size();
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr == begin) fail("invalid number");
    pos_ += static_cast<size_t>(ptr - begin);
    return make_number(value);
  }

  std::string_view text_;
  size_t pos_ = 0;
};

// Grammar levels for the printer: expr=1, term=2, factor=3, unary=4, atom=5.
int level(const Expr& e) {
  switch (e.op) {
    case Op::add:
    case Op::sub:
      return 1;
    case Op::mul:
    case Op::div:
      return 2;
    case Op::pow:
      return 3;
    case Op::neg:
      return 4;
    default:
      return 5;
  }
}

std::string format_number(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

void print(const Expr& e, int min_level, std::string& out) {
  bool parens = level(e) < min_level;
  if (parens) out += '(';
  switch (e.op) {
    case Op::number:
      out += format_number(e.number);
      break;
    case Op::var_p:
      out += 'p';
      break;
    case Op::neg:
      out += '-';
      print(*e.lhs, 4, out);
      break;
    case Op::add:
    case Op::sub:
      print(*e.lhs, 1, out);
      out += (e.op == Op::add) ? " + " : " - ";
      print(*e.rhs, 2, out);  // right operand must be a term
      break;
    case Op::mul:
    case Op::div:
      print(*e.lhs, 2, out);
      out += (e.op == Op::mul) ? "*" : "/";
      print(*e.rhs, 3, out);  // right operand must be a factor
      break;
    case Op::pow:
      print(*e.lhs, 4, out);  // base must be a unary
      out += '^';
      print(*e.rhs, 3, out);  // exponent is a factor (right-associative)
      break;
    case Op::fn_ln:
    case Op::fn_exp:
    case Op::fn_sqrt:
    case Op::fn_abs: {
      const char* name = e.op == Op::fn_ln     ? "ln"
                         : e.op == Op::fn_exp  ? "exp"
                         : e.op == Op::fn_sqrt ? "sqrt"
                                               : "abs";
      out += name;
      out += '(';
      print(*e.lhs, 1, out);
      out += ')';
      break;
    }
  }
  if (parens) out += ')';
}

}  // namespace

LossSpec parse_loss_spec(std::string_view text) { return Parser(text).parse_spec(); }

ExprPtr parse_expression(std::string_view text) {
  return Parser(text).parse_whole_expression();
}

double eval(const Expr& e, double p) {
  switch (e.op) {
    case Op::number:
      return e.number;
    case Op::var_p:
      return p;
    case Op::neg:
      return -eval(*e.lhs, p);
    case Op::add:
      return eval(*e.lhs, p) + eval(*e.rhs, p);
    case Op::sub:
      return eval(*e.lhs, p) - eval(*e.rhs, p);
    case Op::mul:
      return eval(*e.lhs, p) * eval(*e.rhs, p);
    case Op::div:
      return eval(*e.lhs, p) / eval(*e.rhs, p);
    case Op::pow:
      return std::pow(eval(*e.lhs, p), eval(*e.rhs, p));
    case Op::fn_ln:
      return std::log(eval(*e.lhs, p));
    case Op::fn_exp:
      return std::exp(eval(*e.lhs, p));
    case Op::fn_sqrt:
      return std::sqrt(eval(*e.lhs, p));
    case Op::fn_abs:
      return std::abs(eval(*e.lhs, p));
  }
  return std::numeric_limits<double>::quiet_NaN();
}

std::string to_string(const Expr& e) {
  std::string out;
  print(e, 1, out);
  return out;
}

bool structurally_equal(const Expr& a, const Expr& b) {
  if (a.op != b.op) return false;
  if (a.op == Op::number) {
    // bit-for-bit: the printer emits shortest round-tripping decimals
    return std::memcmp(&a.number, &b.number, sizeof(double)) == 0;
  }
  if ((a.lhs == nullptr) != (b.lhs == nullptr)) return false;
  if ((a.rhs == nullptr) != (b.rhs == nullptr)) return false;
  if (a.lhs && !structurally_equal(*a.lhs, *b.lhs)) return false;
  if (a.rhs && !structurally_equal(*a.rhs, *b.rhs)) return false;
  return true;
}

}  // namespace lossgeom::dsl
