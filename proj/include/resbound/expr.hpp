#pragma once

// Closed-form expressions over the variables t, x, y, s.
//
// Grammar (EBNF):
//   expr    = term , { ("+" | "-") , term } ;
//   term    = unary , { ("*" | "/") , unary } ;
//   unary   = "-" , unary | power ;
//   power   = primary , [ "^" , unary ] ;          (right associative)
//   primary = number | variable | func , "(" , expr , ")"
//           | "atan2" , "(" , expr , "," , expr , ")" | "(" , expr , ")" ;
//   func    = "sin" | "cos" | "exp" | "ln" | "abs" ;
//
// Derivatives are computed with truncated Taylor arithmetic (order <= 4).

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "resbound/error.hpp"

namespace resbound {

enum class Var : std::uint8_t { t = 0, x = 1, y = 2, s = 3 };

constexpr char var_name(Var v) {
  constexpr std::array<char, 4> names{'t', 'x', 'y', 's'};
  return names[static_cast<std::size_t>(v)];
}

class Bindings {
 public:
  Bindings() = default;

  Bindings& set(Var v, double value) {
    values_[static_cast<std::size_t>(v)] = value;
    return *this;
  }

  std::optional<double> get(Var v) const { return values_[static_cast<std::size_t>(v)]; }

  static Bindings at_t(double t) { return Bindings{}.set(Var::t, t); }
  static Bindings at_xy(double x, double y) { return Bindings{}.set(Var::x, x).set(Var::y, y); }

 private:
  std::array<std::optional<double>, 4> values_{};
};

inline constexpr int kMaxDualOrder = 4;

/// Value plus derivatives 1..order with respect to one variable.
struct DualValue {
  double value = 0.0;
  std::vector<double> derivatives;

  double derivative(int k) const { return k == 0 ? value : derivatives.at(static_cast<std::size_t>(k - 1)); }
};

namespace detail {

// Normalized Taylor coefficients c_k = f^(k)(x0) / k!, truncated at `order`.
struct Taylor {
  std::array<double, kMaxDualOrder + 1> c{};
  int order = 0;

  static Taylor constant(double v, int order) {
    Taylor r;
    r.order = order;
    r.c[0] = v;
    return r;
  }

  bool is_constant() const {
    for (int k = 1; k <= order; ++k) {
      if (c[k] != 0.0) return false;
    }
    return true;
  }
};

inline Taylor operator+(const Taylor& a, const Taylor& b) {
  Taylor r;
  r.order = a.order;
  for (int k = 0; k <= a.order; ++k) r.c[k] = a.c[k] + b.c[k];
  return r;
}

inline Taylor operator-(const Taylor& a, const Taylor& b) {
  Taylor r;
  r.order = a.order;
  for (int k = 0; k <= a.order; ++k) r.c[k] = a.c[k] - b.c[k];
  return r;
}

inline Taylor operator-(const Taylor& a) {
  Taylor r;
  r.order = a.order;
  for (int k = 0; k <= a.order; ++k) r.c[k] = -a.c[k];
  return r;
}

inline Taylor operator*(const Taylor& a, const Taylor& b) {
  Taylor r;
  r.order = a.order;
  for (int k = 0; k <= a.order; ++k) {
    double acc = 0.0;
    for (int i = 0; i <= k; ++i) acc += a.c[i] * b.c[k - i];
    r.c[k] = acc;
  }
  return r;
}

inline Taylor operator/(const Taylor& a, const Taylor& b) {
  if (b.c[0] == 0.0) throw Error(ErrorKind::DomainError, "division by zero");
  Taylor r;
  r.order = a.order;
  for (int k = 0; k <= a.order; ++k) {
    double acc = a.c[k];
    for (int i = 1; i <= k; ++i) acc -= b.c[i] * r.c[k - i];
    r.c[k] = acc / b.c[0];
  }
  return r;
}

inline Taylor texp(const Taylor& a) {
  Taylor r;
  r.order = a.order;
  r.c[0] = std::exp(a.c[0]);
  for (int k = 1; k <= a.order; ++k) {
    double acc = 0.0;
    for (int i = 1; i <= k; ++i) acc += i * a.c[i] * r.c[k - i];
    r.c[k] = acc / k;
  }
  return r;
}

inline Taylor tln(const Taylor& a) {
  if (!(a.c[0] > 0.0)) throw Error(ErrorKind::DomainError, "ln of non-positive value");
  Taylor r;
  r.order = a.order;
  r.c[0] = std::log(a.c[0]);
  for (int k = 1; k <= a.order; ++k) {
    double acc = 0.0;
    for (int i = 1; i < k; ++i) acc += i * r.c[i] * a.c[k - i];
    r.c[k] = (a.c[k] - acc / k) / a.c[0];
  }
  return r;
}

inline std::pair<Taylor, Taylor> tsincos(const Taylor& a) {
  Taylor s, c;
  s.order = c.order = a.order;
  s.c[0] = std::sin(a.c[0]);
  c.c[0] = std::cos(a.c[0]);
  for (int k = 1; k <= a.order; ++k) {
    double sacc = 0.0;
    double cacc = 0.0;
    for (int i = 1; i <= k; ++i) {
      sacc += i * a.c[i] * c.c[k - i];
      cacc += i * a.c[i] * s.c[k - i];
    }
    s.c[k] = sacc / k;
    c.c[k] = -cacc / k;
  }
  return {s, c};
}

// Subgradient 0 at the kink.
inline Taylor tabs(const Taylor& a) {
  if (a.c[0] > 0.0) return a;
  if (a.c[0] < 0.0) return -a;
  return Taylor::constant(0.0, a.order);
}

inline Taylor tderiv(const Taylor& a) {
  Taylor r;
  r.order = a.order;
  for (int k = 0; k < a.order; ++k) r.c[k] = (k + 1) * a.c[k + 1];
  return r;
}

inline Taylor tintegrate(const Taylor& d, double value) {
  Taylor r;
  r.order = d.order;
  r.c[0] = value;
  for (int k = 1; k <= d.order; ++k) r.c[k] = d.c[k - 1] / k;
  return r;
}

inline Taylor tatan2(const Taylor& y, const Taylor& x) {
  const Taylor den = x * x + y * y;
  if (den.c[0] == 0.0) throw Error(ErrorKind::DomainError, "atan2(0, 0)");
  const Taylor num = x * tderiv(y) - y * tderiv(x);
  return tintegrate(num / den, std::atan2(y.c[0], x.c[0]));
}

inline Taylor tpow(const Taylor& base, const Taylor& expo) {
  const double p = expo.c[0];
  if (expo.is_constant() && p == std::nearbyint(p) && std::abs(p) <= 64.0) {
    const int n = static_cast<int>(std::abs(p));
    Taylor r = Taylor::constant(1.0, base.order);
    for (int i = 0; i < n; ++i) r = r * base;
    if (p < 0.0) r = Taylor::constant(1.0, base.order) / r;
    return r;
  }
  if (!(base.c[0] > 0.0)) {
    throw Error(ErrorKind::DomainError, "non-integer power of non-positive base");
  }
  return texp(expo * tln(base));
}

}  // namespace detail

class Expression {
 public:
  enum class Op : std::uint8_t {
    Number, Variable, Neg, Sin, Cos, Exp, Ln, Abs, Add, Sub, Mul, Div, Pow, Atan2
  };

  struct Node {
    Op op = Op::Number;
    double number = 0.0;
    Var var = Var::t;
    std::shared_ptr<const Node> lhs;
    std::shared_ptr<const Node> rhs;
  };

  Expression() : root_(make_number(0.0)) {}

  static Expression parse(std::string_view text);
  static Expression constant(double v) { return Expression(make_number(v)); }

  double eval(const Bindings& at) const { return eval_node(*root_, at); }

  DualValue eval_dual(Var wrt, const Bindings& at, int order) const {
    if (order < 0 || order > kMaxDualOrder) {
      throw Error(ErrorKind::DomainError, "derivative order must be in [0, 4]");
    }
    const detail::Taylor t = taylor_node(*root_, wrt, at, order);
    DualValue out;
    out.value = t.c[0];
    double factorial = 1.0;
    for (int k = 1; k <= order; ++k) {
      factorial *= k;
      out.derivatives.push_back(t.c[k] * factorial);
    }
    return out;
  }

  /// Fully parenthesized text that parses back to the same tree.
  std::string to_string() const {
    std::string out;
    print_node(*root_, out);
    return out;
  }

  bool uses(Var v) const { return uses_node(*root_, v); }

  const Node& root() const { return *root_; }

  friend bool operator==(const Expression& a, const Expression& b) { return same_node(*a.root_, *b.root_); }

 private:
  explicit Expression(std::shared_ptr<const Node> root) : root_(std::move(root)) {}

  static std::shared_ptr<const Node> make_number(double v) {
    auto n = std::make_shared<Node>();
    n->op = Op::Number;
    n->number = v;
    return n;
  }

  static std::shared_ptr<const Node> make(Op op, std::shared_ptr<const Node> lhs,
                                          std::shared_ptr<const Node> rhs = nullptr) {
    auto n = std::make_shared<Node>();
    n->op = op;
    n->lhs = std::move(lhs);
    n->rhs = std::move(rhs);
    return n;
  }

  static double var_value(Var v, const Bindings& at) {
    const auto value = at.get(v);
    if (!value) throw Error(ErrorKind::UnboundVariable, std::string("variable '") + var_name(v) + "' is not bound");
    return *value;
  }

  static double eval_node(const Node& n, const Bindings& at) {
    switch (n.op) {
      case Op::Number: return n.number;
      case Op::Variable: return var_value(n.var, at);
      case Op::Neg: return -eval_node(*n.lhs, at);
      case Op::Sin: return std::sin(eval_node(*n.lhs, at));
      case Op::Cos: return std::cos(eval_node(*n.lhs, at));
      case Op::Exp: return std::exp(eval_node(*n.lhs, at));
      case Op::Ln: {
        const double a = eval_node(*n.lhs, at);
        if (!(a > 0.0)) throw Error(ErrorKind::DomainError, "ln of non-positive value");
        return std::log(a);
      }
      case Op::Abs: return std::abs(eval_node(*n.lhs, at));
      case Op::Add: return eval_node(*n.lhs, at) + eval_node(*n.rhs, at);
      case Op::Sub: return eval_node(*n.lhs, at) - eval_node(*n.rhs, at);
      case Op::Mul: return eval_node(*n.lhs, at) * eval_node(*n.rhs, at);
      case Op::Div: {
        const double den = eval_node(*n.rhs, at);
        if (den == 0.0) throw Error(ErrorKind::DomainError, "division by zero");
        return eval_node(*n.lhs, at) / den;
      }
      case Op::Pow: {
        const double b = eval_node(*n.lhs, at);
        const double p = eval_node(*n.rhs, at);
        return detail::tpow(detail::Taylor::constant(b, 0), detail::Taylor::constant(p, 0)).c[0];
      }
      case Op::Atan2: {
        const double y = eval_node(*n.lhs, at);
        const double x = eval_node(*n.rhs, at);
        if (x == 0.0 && y == 0.0) throw Error(ErrorKind::DomainError, "atan2(0, 0)");
        return std::atan2(y, x);
      }
    }
    return 0.0;
  }

  static detail::Taylor taylor_node(const Node& n, Var wrt, const Bindings& at, int order) {
    using detail::Taylor;
    switch (n.op) {
      case Op::Number: return Taylor::constant(n.number, order);
      case Op::Variable: {
        Taylor r = Taylor::constant(var_value(n.var, at), order);
        if (n.var == wrt && order >= 1) r.c[1] = 1.0;
        return r;
      }
      case Op::Neg: return -taylor_node(*n.lhs, wrt, at, order);
      case Op::Sin: return detail::tsincos(taylor_node(*n.lhs, wrt, at, order)).first;
      case Op::Cos: return detail::tsincos(taylor_node(*n.lhs, wrt, at, order)).second;
      case Op::Exp: return detail::texp(taylor_node(*n.lhs, wrt, at, order));
      case Op::Ln: return detail::tln(taylor_node(*n.lhs, wrt, at, order));
      case Op::Abs: return detail::tabs(taylor_node(*n.lhs, wrt, at, order));
      case Op::Add: return taylor_node(*n.lhs, wrt, at, order) + taylor_node(*n.rhs, wrt, at, order);
      case Op::Sub: return taylor_node(*n.lhs, wrt, at, order) - taylor_node(*n.rhs, wrt, at, order);
      case Op::Mul: return taylor_node(*n.lhs, wrt, at, order) * taylor_node(*n.rhs, wrt, at, order);
      case Op::Div: return taylor_node(*n.lhs, wrt, at, order) / taylor_node(*n.rhs, wrt, at, order);
      case Op::Pow: return detail::tpow(taylor_node(*n.lhs, wrt, at, order), taylor_node(*n.rhs, wrt, at, order));
      case Op::Atan2: return detail::tatan2(taylor_node(*n.lhs, wrt, at, order), taylor_node(*n.rhs, wrt, at, order));
    }
    return Taylor::constant(0.0, order);
  }

  static void print_number(double v, std::string& out) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", std::abs(v));
    if (std::signbit(v)) {
      out += "(-";
      out += buf;
      out += ')';
    } else {
      out += buf;
    }
  }

  static void print_node(const Node& n, std::string& out) {
    auto unary = [&](const char* name) {
      out += name;
      out += '(';
      print_node(*n.lhs, out);
      out += ')';
    };
    auto binary = [&](char op) {
      out += '(';
      print_node(*n.lhs, out);
      out += op;
      print_node(*n.rhs, out);
      out += ')';
    };
    switch (n.op) {
      case Op::Number: print_number(n.number, out); break;
      case Op::Variable: out += var_name(n.var); break;
      case Op::Neg:
        out += "(-";
        print_node(*n.lhs, out);
        out += ')';
        break;
      case Op::Sin: unary("sin"); break;
      case Op::Cos: unary("cos"); break;
      case Op::Exp: unary("exp"); break;
      case Op::Ln: unary("ln"); break;
      case Op::Abs: unary("abs"); break;
      case Op::Add: binary('+'); break;
      case Op::Sub: binary('-'); break;
      case Op::Mul: binary('*'); break;
      case Op::Div: binary('/'); break;
      case Op::Pow: binary('^'); break;
      case Op::Atan2:
        out += "atan2(";
        print_node(*n.lhs, out);
        out += ',';
        print_node(*n.rhs, out);
        out += ')';
        break;
    }
  }

  static bool same_node(const Node& a, const Node& b) {
    if (a.op != b.op) return false;
    if (a.op == Op::Number) return a.number == b.number;
    if (a.op == Op::Variable) return a.var == b.var;
    if ((a.lhs == nullptr) != (b.lhs == nullptr) || (a.rhs == nullptr) != (b.rhs == nullptr)) return false;
    if (a.lhs && !same_node(*a.lhs, *b.lhs)) return false;
    if (a.rhs && !same_node(*a.rhs, *b.rhs)) return false;
    return true;
  }

  static bool uses_node(const Node& n, Var v) {
    if (n.op == Op::Variable) return n.var == v;
    return (n.lhs && uses_node(*n.lhs, v)) || (n.rhs && uses_node(*n.rhs, v));
  }

  class Parser;

  std::shared_ptr<const Node> root_;
};

class Expression::Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  std::shared_ptr<const Node> parse_all() {
    auto e = parse_expr();
    skip_ws();
    if (pos_ != text_.size()) throw SyntaxError(pos_, "unexpected trailing input");
    return e;
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\n' || text_[pos_] == '\r')) {
      ++pos_;
    }
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) throw SyntaxError(pos_, std::string("expected '") + c + "'");
  }

  std::shared_ptr<const Node> parse_expr() {
    auto lhs = parse_term();
    for (;;) {
      if (accept('+')) {
        lhs = make(Op::Add, lhs, parse_term());
      } else if (accept('-')) {
        lhs = make(Op::Sub, lhs, parse_term());
      } else {
        return lhs;
      }
    }
  }

  std::shared_ptr<const Node> parse_term() {
    auto lhs = parse_unary();
    for (;;) {
      if (accept('*')) {
        lhs = make(Op::Mul, lhs, parse_unary());
      } else if (accept('/')) {
        lhs = make(Op::Div, lhs, parse_unary());
      } else {
        return lhs;
      }
    }
  }

  std::shared_ptr<const Node> parse_unary() {
    if (accept('-')) return make(Op::Neg, parse_unary());
    return parse_power();
  }

  std::shared_ptr<const Node> parse_power() {
    auto base = parse_primary();
    if (accept('^')) return make(Op::Pow, base, parse_unary());
    return base;
  }

  std::shared_ptr<const Node> parse_primary() {
    skip_ws();
    if (pos_ >= text_.size()) throw SyntaxError(pos_, "unexpected end of input");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      auto e = parse_expr();
      expect(')');
      return e;
    }
    if ((c >= '0' && c <= '9') || c == '.') return parse_number();
    if (is_ident_start(c)) return parse_identifier();
    throw SyntaxError(pos_, std::string("unexpected character '") + c + "'");
  }

  std::shared_ptr<const Node> parse_number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      std::size_t n = 0;
      while (pos_ < text_.size() && text_[pos_] >= '0' && text_[pos_] <= '9') {
        ++pos_;
        ++n;
      }
      return n;
    };
    std::size_t mantissa = digits();
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      mantissa += digits();
    }
    if (mantissa == 0) throw SyntaxError(start, "malformed number");
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      if (digits() == 0) throw SyntaxError(pos_, "malformed exponent");
    }
    const std::string literal(text_.substr(start, pos_ - start));
    return make_number(std::strtod(literal.c_str(), nullptr));
  }

  static bool is_ident_start(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }
  static bool is_ident_char(char c) { return is_ident_start(c) || (c >= '0' && c <= '9'); }

  std::shared_ptr<const Node> parse_identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && is_ident_char(text_[pos_])) ++pos_;
    const std::string_view name = text_.substr(start, pos_ - start);

    if (name.size() == 1) {
      constexpr std::string_view vars = "txys";
      const auto idx = vars.find(name[0]);
      if (idx != std::string_view::npos) {
        auto n = std::make_shared<Node>();
        n->op = Op::Variable;
        n->var = static_cast<Var>(idx);
        return n;
      }
    }

    static constexpr std::array<std::pair<std::string_view, Op>, 5> unary_funcs{{
        {"sin", Op::Sin}, {"cos", Op::Cos}, {"exp", Op::Exp}, {"ln", Op::Ln}, {"abs", Op::Abs}}};
    for (const auto& [fname, op] : unary_funcs) {
      if (name == fname) {
        expect('(');
        auto arg = parse_expr();
        expect(')');
        return make(op, arg);
      }
    }
    if (name == "atan2") {
      expect('(');
      auto y = parse_expr();
      expect(',');
      auto x = parse_expr();
      expect(')');
      return make(Op::Atan2, y, x);
    }
    throw Error(ErrorKind::UnknownIdentifier,
                "'" + std::string(name) + "' at offset " + std::to_string(start));
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

inline Expression Expression::parse(std::string_view text) { return Expression(Parser(text).parse_all()); }

/// Shortest round-tripping decimal text for embedding constants in expressions.
inline std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s(buf);
  if (v < 0.0) return "(" + s + ")";
  return s;
}

}  // namespace resbound
