#pragma once

// Scalar expression language for right-hand sides f(t,x,y), g(t,x,y) and
// weight functions psi(t).
//
// Grammar (public contract, also used by the config front end):
//
//   expr    := term (('+'|'-') term)*
//   term    := factor (('*'|'/') factor)*
//   factor  := unary ('^' factor)?          -- '^' is right-associative
//   unary   := '-'? primary
//   primary := number | ident | ident '(' expr (',' expr)* ')' | '(' expr ')'
//
// Note that the base of '^' is a unary, so "-t^2" parses as "(-t)^2".
// Identifiers are limited to the variables t, x, y, the constants pi and e,
// and the functions sin, cos, tan, exp, ln, sqrt, abs, atan.  Numbers are
// decimal literals with an optional exponent; there is no implicit
// multiplication.

#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <cstring>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "psifrac/errors.hpp"

namespace psifrac {

enum class TokenKind { number, identifier, op, lparen, rparen, comma };

struct Token {
  TokenKind kind;
  std::string lexeme;
  std::size_t position;  // byte offset into the source
};

enum class Var { t, x, y };

enum class Func { sin, cos, tan, exp, ln, sqrt, abs, atan };

enum class NodeKind { constant, variable, negate, add, sub, mul, div, pow, call };

struct ExprNode;
using ExprNodePtr = std::shared_ptr<const ExprNode>;

/// Immutable expression tree node.  Trees are shared freely; evaluation is
/// reentrant and thread-safe.
struct ExprNode {
  NodeKind kind;
  double value = 0.0;      // constant
  std::string name;        // non-empty for the named constants "pi" and "e"
  Var var = Var::t;        // variable
  Func func = Func::sin;   // call
  ExprNodePtr lhs, rhs;    // children; unary/call use lhs only
};

/// Handle for a parsed expression.
struct ExprAst {
  ExprNodePtr root;
};

inline const char* func_name(Func f) {
  switch (f) {
    case Func::sin: return "sin";
    case Func::cos: return "cos";
    case Func::tan: return "tan";
    case Func::exp: return "exp";
    case Func::ln: return "ln";
    case Func::sqrt: return "sqrt";
    case Func::abs: return "abs";
    case Func::atan: return "atan";
  }
  return "?";
}

inline const char* var_name(Var v) {
  switch (v) {
    case Var::t: return "t";
    case Var::x: return "x";
    case Var::y: return "y";
  }
  return "?";
}

namespace detail {

inline bool is_ident_start(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}
inline bool is_ident_char(char c) { return is_ident_start(c) || (c >= '0' && c <= '9'); }
inline bool is_digit(char c) { return c >= '0' && c <= '9'; }

}  // namespace detail

inline std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < src.size()) {
    const char c = src[i];
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      ++i;
      continue;
    }
    const std::size_t start = i;
    if (detail::is_digit(c) || (c == '.' && i + 1 < src.size() && detail::is_digit(src[i + 1]))) {
      while (i < src.size() && detail::is_digit(src[i])) ++i;
      if (i < src.size() && src[i] == '.') {
        ++i;
        while (i < src.size() && detail::is_digit(src[i])) ++i;
      }
      if (i < src.size() && (src[i] == 'e' || src[i] == 'E')) {
        std::size_t j = i + 1;
        if (j < src.size() && (src[j] == '+' || src[j] == '-')) ++j;
        if (j < src.size() && detail::is_digit(src[j])) {
          i = j;
          while (i < src.size() && detail::is_digit(src[i])) ++i;
        }
      }
      out.push_back({TokenKind::number, std::string(src.substr(start, i - start)), start});
    } else if (detail::is_ident_start(c)) {
      while (i < src.size() && detail::is_ident_char(src[i])) ++i;
      out.push_back({TokenKind::identifier, std::string(src.substr(start, i - start)), start});
    } else if (c == '+' || c == '-' || c == '*' || c == '/' || c == '^') {
      out.push_back({TokenKind::op, std::string(1, c), start});
      ++i;
    } else if (c == '(') {
      out.push_back({TokenKind::lparen, "(", start});
      ++i;
    } else if (c == ')') {
      out.push_back({TokenKind::rparen, ")", start});
      ++i;
    } else if (c == ',') {
      out.push_back({TokenKind::comma, ",", start});
      ++i;
    } else {
      throw parse_error("unexpected character '" + std::string(1, c) + "'", start);
    }
  }
  return out;
}

namespace detail {

inline ExprNodePtr make_const(double v, std::string name = {}) {
  auto n = std::make_shared<ExprNode>();
  n->kind = NodeKind::constant;
  n->value = v;
  n->name = std::move(name);
  return n;
}

inline ExprNodePtr make_var(Var v) {
  auto n = std::make_shared<ExprNode>();
  n->kind = NodeKind::variable;
  n->var = v;
  return n;
}

inline ExprNodePtr make_unary(NodeKind k, ExprNodePtr child) {
  auto n = std::make_shared<ExprNode>();
  n->kind = k;
  n->lhs = std::move(child);
  return n;
}

inline ExprNodePtr make_binary(NodeKind k, ExprNodePtr l, ExprNodePtr r) {
  auto n = std::make_shared<ExprNode>();
  n->kind = k;
  n->lhs = std::move(l);
  n->rhs = std::move(r);
  return n;
}

inline ExprNodePtr make_call(Func f, ExprNodePtr arg) {
  auto n = std::make_shared<ExprNode>();
  n->kind = NodeKind::call;
  n->func = f;
  n->lhs = std::move(arg);
  return n;
}

inline bool is_const(const ExprNodePtr& n) { return n->kind == NodeKind::constant; }
inline bool is_const(const ExprNodePtr& n, double v) {
  return n->kind == NodeKind::constant && n->value == v && n->name.empty();
}

class Parser {
 public:
  Parser(std::vector<Token> tokens, std::size_t src_len)
      : tokens_(std::move(tokens)), src_len_(src_len) {}

  ExprNodePtr run() {
    auto e = parse_expr();
    if (pos_ < tokens_.size())
      throw parse_error("unexpected token '" + tokens_[pos_].lexeme + "'",
                        tokens_[pos_].position);
    return e;
  }

 private:
  const Token* peek() const { return pos_ < tokens_.size() ? &tokens_[pos_] : nullptr; }

  bool accept_op(char c) {
    const Token* tk = peek();
    if (tk && tk->kind == TokenKind::op && tk->lexeme[0] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    const Token* tk = peek();
    throw parse_error(msg, tk ? tk->position : src_len_);
  }

  ExprNodePtr parse_expr() {
    auto lhs = parse_term();
    for (;;) {
      if (accept_op('+'))
        lhs = make_binary(NodeKind::add, lhs, parse_term());
      else if (accept_op('-'))
        lhs = make_binary(NodeKind::sub, lhs, parse_term());
      else
        return lhs;
    }
  }

  ExprNodePtr parse_term() {
    auto lhs = parse_factor();
    for (;;) {
      if (accept_op('*'))
        lhs = make_binary(NodeKind::mul, lhs, parse_factor());
      else if (accept_op('/'))
        lhs = make_binary(NodeKind::div, lhs, parse_factor());
      else
        return lhs;
    }
  }

  ExprNodePtr parse_factor() {
    auto base = parse_unary();
    if (accept_op('^')) return make_binary(NodeKind::pow, base, parse_factor());
    return base;
  }

  ExprNodePtr parse_unary() {
    if (accept_op('-')) {
      auto inner = parse_primary();
      // fold a negated literal so that "-2" and its printed form agree
      if (inner->kind == NodeKind::constant && inner->name.empty())
        return make_const(-inner->value);
      return make_unary(NodeKind::negate, inner);
    }
    return parse_primary();
  }

  ExprNodePtr parse_primary() {
    const Token* tk = peek();
    if (!tk) fail("unexpected end of expression");
    if (tk->kind == TokenKind::number) {
      ++pos_;
      double v = 0.0;
      const char* first = tk->lexeme.data();
      const char* last = first + tk->lexeme.size();
      auto [ptr, ec] = std::from_chars(first, last, v);
      if (ec != std::errc{} || ptr != last)
        throw parse_error("malformed number '" + tk->lexeme + "'", tk->position);
      return make_const(v);
    }
    if (tk->kind == TokenKind::lparen) {
      ++pos_;
      auto e = parse_expr();
      if (!accept_rparen()) fail("expected ')'");
      return e;
    }
    if (tk->kind == TokenKind::identifier) {
      ++pos_;
      const std::string& id = tk->lexeme;
      const Token* next = peek();
      if (next && next->kind == TokenKind::lparen) {
        ++pos_;
        std::vector<ExprNodePtr> args;
        args.push_back(parse_expr());
        while (true) {
          const Token* sep = peek();
          if (sep && sep->kind == TokenKind::comma) {
            ++pos_;
            args.push_back(parse_expr());
          } else {
            break;
          }
        }
        if (!accept_rparen()) fail("expected ')'");
        Func f;
        if (id == "sin") f = Func::sin;
        else if (id == "cos") f = Func::cos;
        else if (id == "tan") f = Func::tan;
        else if (id == "exp") f = Func::exp;
        else if (id == "ln") f = Func::ln;
        else if (id == "sqrt") f = Func::sqrt;
        else if (id == "abs") f = Func::abs;
        else if (id == "atan") f = Func::atan;
        else throw parse_error("unknown function '" + id + "'", tk->position);
        if (args.size() != 1)
          throw parse_error("function '" + id + "' takes exactly one argument", tk->position);
        return make_call(f, args[0]);
      }
      if (id == "t") return make_var(Var::t);
      if (id == "x") return make_var(Var::x);
      if (id == "y") return make_var(Var::y);
      if (id == "pi") return make_const(3.14159265358979323846, "pi");
      if (id == "e") return make_const(2.71828182845904523536, "e");
      throw parse_error("unknown identifier '" + id + "'", tk->position);
    }
    fail("unexpected token '" + tk->lexeme + "'");
  }

  bool accept_rparen() {
    const Token* tk = peek();
    if (tk && tk->kind == TokenKind::rparen) {
      ++pos_;
      return true;
    }
    return false;
  }

  std::vector<Token> tokens_;
  std::size_t src_len_;
  std::size_t pos_ = 0;
};

inline double eval_node(const ExprNode& n, double t, double x, double y);

inline double checked(double v, const char* what) {
  if (!std::isfinite(v)) throw eval_error(std::string("overflow evaluating ") + what);
  return v;
}

inline double eval_call(Func f, double a) {
  switch (f) {
    case Func::sin: return std::sin(a);
    case Func::cos: return std::cos(a);
    case Func::tan: return checked(std::tan(a), "tan");
    case Func::exp: return checked(std::exp(a), "exp");
    case Func::ln:
      if (a <= 0.0) throw eval_error("ln of a non-positive value");
      return std::log(a);
    case Func::sqrt:
      if (a < 0.0) throw eval_error("sqrt of a negative value");
      return std::sqrt(a);
    case Func::abs: return std::fabs(a);
    case Func::atan: return std::atan(a);
  }
  throw eval_error("unknown function");
}

inline double eval_pow(double base, double exponent) {
  if (base == 0.0 && exponent < 0.0) throw eval_error("zero raised to a negative power");
  if (base < 0.0 && exponent != std::floor(exponent))
    throw eval_error("negative base with non-integer exponent");
  return checked(std::pow(base, exponent), "pow");
}

inline double eval_node(const ExprNode& n, double t, double x, double y) {
  switch (n.kind) {
    case NodeKind::constant: return n.value;
    case NodeKind::variable:
      switch (n.var) {
        case Var::t: return t;
        case Var::x: return x;
        case Var::y: return y;
      }
      break;
    case NodeKind::negate: return -eval_node(*n.lhs, t, x, y);
    case NodeKind::add:
      return checked(eval_node(*n.lhs, t, x, y) + eval_node(*n.rhs, t, x, y), "+");
    case NodeKind::sub:
      return checked(eval_node(*n.lhs, t, x, y) - eval_node(*n.rhs, t, x, y), "-");
    case NodeKind::mul:
      return checked(eval_node(*n.lhs, t, x, y) * eval_node(*n.rhs, t, x, y), "*");
    case NodeKind::div: {
      const double denom = eval_node(*n.rhs, t, x, y);
      if (denom == 0.0) throw eval_error("division by zero");
      return checked(eval_node(*n.lhs, t, x, y) / denom, "/");
    }
    case NodeKind::pow:
      return eval_pow(eval_node(*n.lhs, t, x, y), eval_node(*n.rhs, t, x, y));
    case NodeKind::call: return eval_call(n.func, eval_node(*n.lhs, t, x, y));
  }
  throw eval_error("malformed expression node");
}

// -- simplifying constructors used by the symbolic derivative ---------------

inline ExprNodePtr fold_const(ExprNodePtr n) {
  // constant-fold when every leaf below is constant and evaluation succeeds
  try {
    switch (n->kind) {
      case NodeKind::negate:
        if (is_const(n->lhs)) return make_const(-n->lhs->value);
        break;
      case NodeKind::add:
      case NodeKind::sub:
      case NodeKind::mul:
      case NodeKind::div:
      case NodeKind::pow:
        if (is_const(n->lhs) && is_const(n->rhs))
          return make_const(eval_node(*n, 0, 0, 0));
        break;
      case NodeKind::call:
        if (is_const(n->lhs)) return make_const(eval_node(*n, 0, 0, 0));
        break;
      default: break;
    }
  } catch (const eval_error&) {
    // leave as-is; the error will resurface at evaluation time
  }
  return n;
}

inline ExprNodePtr s_neg(ExprNodePtr a) {
  if (is_const(a)) return make_const(-a->value);
  if (a->kind == NodeKind::negate) return a->lhs;
  return make_unary(NodeKind::negate, std::move(a));
}

inline ExprNodePtr s_add(ExprNodePtr a, ExprNodePtr b) {
  if (is_const(a, 0.0)) return b;
  if (is_const(b, 0.0)) return a;
  return fold_const(make_binary(NodeKind::add, std::move(a), std::move(b)));
}

inline ExprNodePtr s_sub(ExprNodePtr a, ExprNodePtr b) {
  if (is_const(b, 0.0)) return a;
  if (is_const(a, 0.0)) return s_neg(std::move(b));
  return fold_const(make_binary(NodeKind::sub, std::move(a), std::move(b)));
}

inline ExprNodePtr s_mul(ExprNodePtr a, ExprNodePtr b) {
  if (is_const(a, 0.0) || is_const(b, 0.0)) return make_const(0.0);
  if (is_const(a, 1.0)) return b;
  if (is_const(b, 1.0)) return a;
  // keep literal coefficients on the left and merge them
  if (is_const(b) && !is_const(a)) std::swap(a, b);
  if (is_const(a) && a->name.empty() && b->kind == NodeKind::mul && is_const(b->lhs) &&
      b->lhs->name.empty())
    return s_mul(make_const(a->value * b->lhs->value), b->rhs);
  return fold_const(make_binary(NodeKind::mul, std::move(a), std::move(b)));
}

inline ExprNodePtr s_div(ExprNodePtr a, ExprNodePtr b) {
  if (is_const(b, 1.0)) return a;
  if (is_const(a, 0.0) && !is_const(b, 0.0)) return make_const(0.0);
  return fold_const(make_binary(NodeKind::div, std::move(a), std::move(b)));
}

inline ExprNodePtr s_pow(ExprNodePtr a, ExprNodePtr b) {
  if (is_const(b, 1.0)) return a;
  if (is_const(b, 0.0)) return make_const(1.0);
  return fold_const(make_binary(NodeKind::pow, std::move(a), std::move(b)));
}

inline bool node_contains_abs(const ExprNode& n) {
  if (n.kind == NodeKind::call && n.func == Func::abs) return true;
  if (n.lhs && node_contains_abs(*n.lhs)) return true;
  if (n.rhs && node_contains_abs(*n.rhs)) return true;
  return false;
}

inline bool node_contains_var(const ExprNode& n, Var v) {
  if (n.kind == NodeKind::variable && n.var == v) return true;
  if (n.lhs && node_contains_var(*n.lhs, v)) return true;
  if (n.rhs && node_contains_var(*n.rhs, v)) return true;
  return false;
}

inline ExprNodePtr diff_node(const ExprNodePtr& n, Var v) {
  switch (n->kind) {
    case NodeKind::constant: return make_const(0.0);
    case NodeKind::variable: return make_const(n->var == v ? 1.0 : 0.0);
    case NodeKind::negate: return s_neg(diff_node(n->lhs, v));
    case NodeKind::add: return s_add(diff_node(n->lhs, v), diff_node(n->rhs, v));
    case NodeKind::sub: return s_sub(diff_node(n->lhs, v), diff_node(n->rhs, v));
    case NodeKind::mul:
      return s_add(s_mul(diff_node(n->lhs, v), n->rhs), s_mul(n->lhs, diff_node(n->rhs, v)));
    case NodeKind::div:
      return s_div(s_sub(s_mul(diff_node(n->lhs, v), n->rhs), s_mul(n->lhs, diff_node(n->rhs, v))),
                   s_pow(n->rhs, make_const(2.0)));
    case NodeKind::pow: {
      const auto& base = n->lhs;
      const auto& expo = n->rhs;
      if (!node_contains_var(*expo, v)) {
        // d(u^c) = c*u^(c-1)*u'
        return s_mul(s_mul(expo, s_pow(base, s_sub(expo, make_const(1.0)))),
                     diff_node(base, v));
      }
      if (!node_contains_var(*base, v)) {
        // d(c^u) = c^u*ln(c)*u'
        return s_mul(s_mul(n, make_call(Func::ln, base)), diff_node(expo, v));
      }
      // general: u^v*(v'*ln(u) + v*u'/u)
      return s_mul(n, s_add(s_mul(diff_node(expo, v), make_call(Func::ln, base)),
                            s_div(s_mul(expo, diff_node(base, v)), base)));
    }
    case NodeKind::call: {
      const auto& u = n->lhs;
      auto du = diff_node(u, v);
      switch (n->func) {
        case Func::sin: return s_mul(make_call(Func::cos, u), du);
        case Func::cos: return s_neg(s_mul(make_call(Func::sin, u), du));
        case Func::tan:
          return s_div(du, s_pow(make_call(Func::cos, u), make_const(2.0)));
        case Func::exp: return s_mul(make_call(Func::exp, u), du);
        case Func::ln: return s_div(du, u);
        case Func::sqrt:
          return s_div(du, s_mul(make_const(2.0), make_call(Func::sqrt, u)));
        case Func::atan:
          return s_div(du, s_add(make_const(1.0), s_pow(u, make_const(2.0))));
        case Func::abs:
          throw unsupported_error("abs is not differentiable");
      }
      break;
    }
  }
  throw unsupported_error("cannot differentiate this node");
}

inline std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  std::string s(buf);
  // trim to the shortest representation that round-trips
  for (int prec = 1; prec < 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    double back = 0.0;
    auto [ptr, ec] = std::from_chars(buf, buf + std::strlen(buf), back);
    (void)ptr;
    if (ec == std::errc{} && back == v) return std::string(buf);
  }
  return s;
}

// precedence levels: add/sub 1, mul/div 2, negate 3, pow 4, primary 5
inline int node_precedence(const ExprNode& n) {
  switch (n.kind) {
    case NodeKind::add:
    case NodeKind::sub: return 1;
    case NodeKind::mul:
    case NodeKind::div: return 2;
    case NodeKind::negate: return 3;
    case NodeKind::pow: return 4;
    default: return 5;
  }
}

inline void print_node(const ExprNode& n, std::string& out, int min_prec) {
  const int prec = node_precedence(n);
  const bool parens = prec < min_prec;
  if (parens) out += '(';
  switch (n.kind) {
    case NodeKind::constant:
      if (!n.name.empty()) out += n.name;
      else out += format_number(n.value);
      break;
    case NodeKind::variable: out += var_name(n.var); break;
    case NodeKind::negate:
      out += '-';
      // the operand of unary '-' must read back as a primary
      print_node(*n.lhs, out, 5);
      break;
    case NodeKind::add:
      print_node(*n.lhs, out, 1);
      out += '+';
      print_node(*n.rhs, out, 2);
      break;
    case NodeKind::sub:
      print_node(*n.lhs, out, 1);
      out += '-';
      print_node(*n.rhs, out, 2);
      break;
    case NodeKind::mul:
      print_node(*n.lhs, out, 2);
      out += '*';
      print_node(*n.rhs, out, 3);
      break;
    case NodeKind::div:
      print_node(*n.lhs, out, 2);
      out += '/';
      print_node(*n.rhs, out, 3);
      break;
    case NodeKind::pow:
      // the base of '^' must read back as a unary, the exponent as a factor
      print_node(*n.lhs, out, n.lhs->kind == NodeKind::negate ? 3 : 5);
      out += '^';
      print_node(*n.rhs, out, 3);
      break;
    case NodeKind::call:
      out += func_name(n.func);
      out += '(';
      print_node(*n.lhs, out, 1);
      out += ')';
      break;
  }
  if (parens) out += ')';
}

inline bool nodes_equal(const ExprNode& a, const ExprNode& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case NodeKind::constant:
      return a.value == b.value && a.name == b.name;
    case NodeKind::variable: return a.var == b.var;
    case NodeKind::call:
      if (a.func != b.func) return false;
      return nodes_equal(*a.lhs, *b.lhs);
    case NodeKind::negate: return nodes_equal(*a.lhs, *b.lhs);
    default: return nodes_equal(*a.lhs, *b.lhs) && nodes_equal(*a.rhs, *b.rhs);
  }
}

}  // namespace detail

/// Parses `source` into an expression tree.  Unknown identifiers and
/// malformed syntax are rejected with a parse_error carrying the offset.
inline ExprAst parse_expression(std::string_view source) {
  if (source.empty()) throw parse_error("empty expression", 0);
  detail::Parser p(tokenize(source), source.size());
  return ExprAst{p.run()};
}

/// Evaluates the tree with the given variable bindings.  Never returns a
/// non-finite value silently: domain failures throw eval_error.
inline double eval_expr(const ExprAst& ast, double t, double x, double y) {
  return detail::eval_node(*ast.root, t, x, y);
}

/// Symbolic derivative with respect to `var`.  Performs constant folding
/// and the obvious unit-element cleanups, nothing more.  Trees containing
/// abs are rejected.
inline ExprAst diff_expr(const ExprAst& ast, Var var) {
  if (detail::node_contains_abs(*ast.root))
    throw unsupported_error("cannot differentiate an expression containing abs");
  return ExprAst{detail::diff_node(ast.root, var)};
}

/// Renders the tree in the grammar above; re-parsing the result yields a
/// structurally identical tree.
inline std::string to_string(const ExprAst& ast) {
  std::string out;
  detail::print_node(*ast.root, out, 0);
  return out;
}

inline bool structurally_equal(const ExprAst& a, const ExprAst& b) {
  return detail::nodes_equal(*a.root, *b.root);
}

inline bool contains_var(const ExprAst& ast, Var v) {
  return detail::node_contains_var(*ast.root, v);
}

inline bool contains_abs(const ExprAst& ast) { return detail::node_contains_abs(*ast.root); }

}  // namespace psifrac
