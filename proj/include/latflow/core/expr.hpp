#pragma once

#include <cctype>
#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "latflow/core/scalar.hpp"

namespace latflow {

/// Parsed arithmetic expression over an optional list of named variables.
///
/// Grammar: + - * / ^, parentheses, decimal and integer literals (exact),
/// constants pi, e, phi, and the functions sqrt, cbrt, root(x, k), exp, log,
/// sin, cos, abs, liouville(b) = sum_{j>=1} b^{-j!}.
class Expr {
 public:
  struct Node;
  using NodePtr = std::shared_ptr<const Node>;

  struct Node {
    enum class Kind { number, constant, variable, negate, add, sub, mul, div, pow, call };
    Kind kind;
    Rational number{};
    std::string name{};
    std::size_t var = 0;
    std::vector<NodePtr> args{};
  };

  Expr() = default;

  static Expr parse(std::string_view text, std::vector<std::string> variables = {}) {
    Parser p{text, variables, 0};
    Expr e;
    e.source_ = std::string(text);
    e.root_ = p.expression();
    p.skip_space();
    if (p.pos != p.text.size())
      throw ParseError("unexpected '" + std::string(p.text.substr(p.pos)) + "' in expression '" + e.source_ + "'");
    e.variables_ = std::move(variables);
    return e;
  }

  const std::string& source() const { return source_; }
  std::size_t arity() const { return variables_.size(); }

  /// Evaluates at the working precision; stays exact where the arithmetic allows.
  Scalar eval(const std::vector<Scalar>& vars = {}) const {
    check_arity(vars.size());
    return eval_scalar(*root_, vars);
  }

  double eval_double(const std::vector<double>& vars = {}) const {
    check_arity(vars.size());
    return eval_dbl(*root_, vars);
  }

  bool uses_variables() const { return mentions_variable(*root_); }

 private:
  struct Parser {
    std::string_view text;
    const std::vector<std::string>& variables;
    std::size_t pos;

    void skip_space() {
      while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    }
    bool accept(char c) {
      skip_space();
      if (pos < text.size() && text[pos] == c) {
        ++pos;
        return true;
      }
      return false;
    }
    [[noreturn]] void fail(const std::string& msg) {
      throw ParseError(msg + " at offset " + std::to_string(pos) + " in '" + std::string(text) + "'");
    }
    static NodePtr make(Node::Kind k, std::vector<NodePtr> args = {}) {
      auto n = std::make_shared<Node>();
      n->kind = k;
      n->args = std::move(args);
      return n;
    }

    NodePtr expression() {
      NodePtr lhs = term();
      for (;;) {
        if (accept('+')) lhs = make(Node::Kind::add, {lhs, term()});
        else if (accept('-')) lhs = make(Node::Kind::sub, {lhs, term()});
        else return lhs;
      }
    }
    NodePtr term() {
      NodePtr lhs = unary();
      for (;;) {
        if (accept('*')) lhs = make(Node::Kind::mul, {lhs, unary()});
        else if (accept('/')) lhs = make(Node::Kind::div, {lhs, unary()});
        else return lhs;
      }
    }
    NodePtr unary() {
      if (accept('-')) return make(Node::Kind::negate, {unary()});
      if (accept('+')) return unary();
      return power();
    }
    NodePtr power() {
      NodePtr base = primary();
      if (accept('^')) return make(Node::Kind::pow, {base, unary()});
      return base;
    }
    NodePtr primary() {
      skip_space();
      if (pos >= text.size()) fail("unexpected end of expression");
      const char c = text[pos];
      if (accept('(')) {
        NodePtr inner = expression();
        if (!accept(')')) fail("expected ')'");
        return inner;
      }
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
      fail(std::string("unexpected character '") + c + "'");
    }
    NodePtr number() {
      const std::size_t start = pos;
      while (pos < text.size() && (std::isdigit(static_cast<unsigned char>(text[pos])) || text[pos] == '.')) ++pos;
      if (pos < text.size() && (text[pos] == 'e' || text[pos] == 'E')) {
        std::size_t look = pos + 1;
        if (look < text.size() && (text[look] == '+' || text[look] == '-')) ++look;
        if (look < text.size() && std::isdigit(static_cast<unsigned char>(text[look]))) {
          pos = look;
          while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
        }
      }
      auto n = std::make_shared<Node>();
      n->kind = Node::Kind::number;
      n->number = parse_rational(text.substr(start, pos - start));
      return n;
    }
    NodePtr identifier() {
      const std::size_t start = pos;
      while (pos < text.size() && (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '_')) ++pos;
      std::string name(text.substr(start, pos - start));
      if (accept('(')) {
        std::vector<NodePtr> args;
        if (!accept(')')) {
          do args.push_back(expression());
          while (accept(','));
          if (!accept(')')) fail("expected ')' after arguments of " + name);
        }
        auto n = make(Node::Kind::call, std::move(args));
        std::const_pointer_cast<Node>(n)->name = name;
        check_call(*n);
        return n;
      }
      for (std::size_t i = 0; i < variables.size(); ++i) {
        if (variables[i] == name) {
          auto n = std::make_shared<Node>();
          n->kind = Node::Kind::variable;
          n->var = i;
          n->name = name;
          return n;
        }
      }
      if (name == "pi" || name == "e" || name == "phi") {
        auto n = std::make_shared<Node>();
        n->kind = Node::Kind::constant;
        n->name = name;
        return n;
      }
      fail("unknown identifier '" + name + "'");
    }
    void check_call(const Node& n) {
      static const std::vector<std::pair<std::string, std::size_t>> known = {
          {"sqrt", 1}, {"cbrt", 1}, {"root", 2}, {"exp", 1}, {"log", 1},
          {"sin", 1},  {"cos", 1},  {"abs", 1},  {"liouville", 1}};
      for (const auto& [fn, arity] : known) {
        if (fn == n.name) {
          if (n.args.size() != arity) fail(fn + " takes " + std::to_string(arity) + " argument(s)");
          return;
        }
      }
      fail("unknown function '" + n.name + "'");
    }
  };

  void check_arity(std::size_t got) const {
    if (got < variables_.size())
      throw DimensionMismatch("expression '" + source_ + "' needs " + std::to_string(variables_.size()) + " variable(s)");
  }

  static bool mentions_variable(const Node& n) {
    if (n.kind == Node::Kind::variable) return true;
    for (const auto& a : n.args)
      if (mentions_variable(*a)) return true;
    return false;
  }

  static bool exact_sqrt(const Rational& r, Rational& out) {
    if (r < 0) return false;
    BigInt num = mp::numerator(r), den = mp::denominator(r);
    BigInt sn = mp::sqrt(num), sd = mp::sqrt(den);
    if (sn * sn != num || sd * sd != den) return false;
    out = Rational(sn, sd);
    return true;
  }

  static Float liouville_float(const Float& base) {
    // Terms below 2^{-P-64} cannot change the rounded value.
    const double log2b = std::log2(base.convert_to<double>());
    if (!(log2b > 0)) throw DomainError("liouville base must exceed 1");
    const double limit = precision_bits() + 64.0;
    Float sum = 0;
    double fact = 1;
    for (int j = 1; fact * log2b <= limit; ++j) {
      fact *= j;
      if (fact * log2b > limit) break;
      sum += mp::pow(base, -Float(fact));
    }
    return sum;
  }

  static Scalar eval_scalar(const Node& n, const std::vector<Scalar>& vars) {
    using K = Node::Kind;
    switch (n.kind) {
      case K::number: return Scalar(n.number);
      case K::variable: return vars[n.var];
      case K::constant:
        if (n.name == "pi") return Scalar(pi_float());
        if (n.name == "e") return Scalar(Float(mp::exp(Float(1))));
        return Scalar(Float((1 + mp::sqrt(Float(5))) / 2));
      case K::negate: return -eval_scalar(*n.args[0], vars);
      case K::add: return eval_scalar(*n.args[0], vars) + eval_scalar(*n.args[1], vars);
      case K::sub: return eval_scalar(*n.args[0], vars) - eval_scalar(*n.args[1], vars);
      case K::mul: return eval_scalar(*n.args[0], vars) * eval_scalar(*n.args[1], vars);
      case K::div: return eval_scalar(*n.args[0], vars) / eval_scalar(*n.args[1], vars);
      case K::pow: {
        Scalar base = eval_scalar(*n.args[0], vars);
        Scalar expo = eval_scalar(*n.args[1], vars);
        if (base.is_exact() && expo.is_integer() && mp::abs(expo.rational()) <= 4096) {
          const long k = mp::numerator(expo.rational()).convert_to<long>();
          if (base.rational() == 0 && k < 0) throw DomainError("zero to a negative power");
          Rational r = 1;
          for (long i = 0; i < std::labs(k); ++i) r *= base.rational();
          return Scalar(k >= 0 ? r : Rational(1 / r));
        }
        return Scalar(Float(mp::pow(base.to_float(), expo.to_float())));
      }
      case K::call: return call_scalar(n, vars);
    }
    throw ParseError("corrupt expression tree");
  }

  static Scalar call_scalar(const Node& n, const std::vector<Scalar>& vars) {
    Scalar a = eval_scalar(*n.args[0], vars);
    if (n.name == "sqrt") {
      Rational r;
      if (a.is_exact() && exact_sqrt(a.rational(), r)) return Scalar(r);
      if (a < Scalar(0)) throw DomainError("sqrt of a negative number");
      return Scalar(Float(mp::sqrt(a.to_float())));
    }
    if (n.name == "abs") return a < Scalar(0) ? -a : a;
    if (n.name == "cbrt") return Scalar(Float(mp::cbrt(a.to_float())));
    if (n.name == "root") {
      Scalar k = eval_scalar(*n.args[1], vars);
      return Scalar(Float(mp::pow(a.to_float(), 1 / k.to_float())));
    }
    if (n.name == "exp") return Scalar(Float(mp::exp(a.to_float())));
    if (n.name == "log") {
      if (a <= Scalar(0)) throw DomainError("log of a non-positive number");
      return Scalar(Float(mp::log(a.to_float())));
    }
    if (n.name == "sin") return Scalar(Float(mp::sin(a.to_float())));
    if (n.name == "cos") return Scalar(Float(mp::cos(a.to_float())));
    if (n.name == "liouville") return Scalar(liouville_float(a.to_float()));
    throw ParseError("unknown function '" + n.name + "'");
  }

  static double eval_dbl(const Node& n, const std::vector<double>& vars) {
    using K = Node::Kind;
    switch (n.kind) {
      case K::number: return n.number.convert_to<double>();
      case K::variable: return vars[n.var];
      case K::constant:
        if (n.name == "pi") return M_PI;
        if (n.name == "e") return M_E;
        return (1 + std::sqrt(5.0)) / 2;
      case K::negate: return -eval_dbl(*n.args[0], vars);
      case K::add: return eval_dbl(*n.args[0], vars) + eval_dbl(*n.args[1], vars);
      case K::sub: return eval_dbl(*n.args[0], vars) - eval_dbl(*n.args[1], vars);
      case K::mul: return eval_dbl(*n.args[0], vars) * eval_dbl(*n.args[1], vars);
      case K::div: return eval_dbl(*n.args[0], vars) / eval_dbl(*n.args[1], vars);
      case K::pow: {
        const double b = eval_dbl(*n.args[0], vars);
        const double p = eval_dbl(*n.args[1], vars);
        if (p == std::round(p) && std::abs(p) <= 64) {
          double r = 1;
          for (int i = 0; i < std::abs(static_cast<int>(p)); ++i) r *= b;
          return p >= 0 ? r : 1 / r;
        }
        return std::pow(b, p);
      }
      case K::call: {
        const double a = eval_dbl(*n.args[0], vars);
        if (n.name == "sqrt") return std::sqrt(a);
        if (n.name == "cbrt") return std::cbrt(a);
        if (n.name == "root") return std::pow(a, 1 / eval_dbl(*n.args[1], vars));
        if (n.name == "exp") return std::exp(a);
        if (n.name == "log") return std::log(a);
        if (n.name == "sin") return std::sin(a);
        if (n.name == "cos") return std::cos(a);
        if (n.name == "abs") return std::abs(a);
        if (n.name == "liouville") {
          double s = 0, fact = 1;
          for (int j = 1; j < 8; ++j) {
            fact *= j;
            s += std::pow(a, -fact);
          }
          return s;
        }
        break;
      }
    }
    throw ParseError("corrupt expression tree");
  }

  std::string source_;
  std::vector<std::string> variables_;
  NodePtr root_;
};

/// Value of a closed expression such as "1/3", "sqrt(2)/2" or "1.5e-3".
inline Scalar evaluate_expression(std::string_view text) { return Expr::parse(text).eval(); }

/// Splits "a, b; c, d" into rows and entries, ignoring separators inside parentheses.
inline std::vector<std::vector<std::string>> split_matrix_literal(std::string_view text) {
  std::vector<std::vector<std::string>> rows(1);
  std::string current;
  int depth = 0;
  auto flush = [&] {
    std::size_t b = current.find_first_not_of(" \t\n");
    std::size_t e = current.find_last_not_of(" \t\n");
    if (b == std::string::npos) throw ParseError("empty matrix entry in '" + std::string(text) + "'");
    rows.back().push_back(current.substr(b, e - b + 1));
    current.clear();
  };
  for (char c : text) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (depth == 0 && c == ',') {
      flush();
    } else if (depth == 0 && c == ';') {
      flush();
      rows.emplace_back();
    } else {
      current.push_back(c);
    }
  }
  flush();
  for (const auto& r : rows)
    if (r.size() != rows.front().size()) throw ParseError("ragged matrix literal '" + std::string(text) + "'");
  return rows;
}

}  // namespace latflow
