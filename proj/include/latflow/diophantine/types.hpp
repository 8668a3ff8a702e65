#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "latflow/core/expr.hpp"
#include "latflow/core/scalar.hpp"

namespace latflow {

/// An m x n system of linear forms. Entries given as expressions or produced
/// by a generator are re-evaluated when the working precision is raised.
class SystemY {
 public:
  using Generator = std::function<Matrix<Scalar>()>;

  SystemY() = default;
  explicit SystemY(Matrix<Scalar> entries) : entries_(std::move(entries)) { validate(); }

  /// "a, b; c, d" with each entry an expression (sqrt, phi, pi, liouville, ...).
  static SystemY parse(std::string_view literal) {
    const auto cells = split_matrix_literal(literal);
    std::vector<std::string> sources;
    for (const auto& row : cells) sources.insert(sources.end(), row.begin(), row.end());
    return from_sources(cells.size(), cells.front().size(), std::move(sources));
  }

  static SystemY from_sources(std::size_t m, std::size_t n, std::vector<std::string> sources) {
    if (sources.size() != m * n) throw DimensionMismatch("entry count does not match m x n");
    std::vector<Expr> exprs;
    for (const auto& s : sources) exprs.push_back(Expr::parse(s));
    SystemY y = from_generator(m, n, [m, n, exprs] {
      Matrix<Scalar> e(m, n);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) e(i, j) = exprs[i * n + j].eval();
      return e;
    });
    y.sources_ = std::move(sources);
    return y;
  }

  static SystemY from_generator(std::size_t m, std::size_t n, Generator gen) {
    SystemY y(gen());
    if (y.m() != m || y.n() != n) throw DimensionMismatch("generator returned the wrong shape");
    y.generator_ = std::move(gen);
    return y;
  }

  /// {"m", "n", "entries": [["expr", ...], ...]}
  static SystemY from_json(const nlohmann::json& j) {
    const auto m = j.at("m").get<std::size_t>(), n = j.at("n").get<std::size_t>();
    std::vector<std::string> src;
    const auto& rows = j.at("entries");
    if (rows.size() != m) throw DimensionMismatch("row count does not match m");
    for (const auto& row : rows) {
      if (row.size() != n) throw DimensionMismatch("row length does not match n");
      for (const auto& e : row) src.push_back(e.is_string() ? e.get<std::string>() : e.dump());
    }
    return from_sources(m, n, std::move(src));
  }

  nlohmann::json to_json() const {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < m(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (std::size_t j = 0; j < n(); ++j)
        row.push_back(sources_.empty() ? entries_(i, j).to_string() : sources_[i * n() + j]);
      rows.push_back(row);
    }
    return {{"m", m()}, {"n", n()}, {"entries", rows}};
  }

  std::size_t m() const { return entries_.rows(); }
  std::size_t n() const { return entries_.cols(); }
  const Matrix<Scalar>& entries() const { return entries_; }
  const Scalar& operator()(std::size_t i, std::size_t j) const { return entries_(i, j); }
  bool is_exact() const { return all_exact(entries_); }
  bool has_generator() const { return static_cast<bool>(generator_); }
  Matrix<Float> float_entries() const { return to_float(entries_); }

  /// Same system with entries recomputed at the working precision when possible.
  SystemY at_current_precision() const {
    if (!generator_ || is_exact()) return *this;
    SystemY y(generator_());
    y.generator_ = generator_;
    y.sources_ = sources_;
    return y;
  }

  SystemY transpose() const {
    SystemY y(entries_.transpose());
    if (generator_) {
      auto gen = generator_;
      y.generator_ = [gen] { return gen().transpose(); };
    }
    if (!sources_.empty()) {
      y.sources_.resize(sources_.size());
      for (std::size_t i = 0; i < m(); ++i)
        for (std::size_t j = 0; j < n(); ++j) y.sources_[j * m() + i] = sources_[i * n() + j];
    }
    return y;
  }

  std::string describe() const {
    std::string out;
    for (std::size_t i = 0; i < m(); ++i) {
      if (i) out += "; ";
      for (std::size_t j = 0; j < n(); ++j) {
        if (j) out += ", ";
        out += sources_.empty() ? entries_(i, j).to_string() : sources_[i * n() + j];
      }
    }
    return out;
  }

 private:
  void validate() const {
    if (entries_.rows() == 0 || entries_.cols() == 0) throw DimensionMismatch("m and n must be at least 1");
    for (std::size_t i = 0; i < m(); ++i)
      for (std::size_t j = 0; j < n(); ++j)
        if (!entries_(i, j).is_exact() && !mp::isfinite(entries_(i, j).to_float()))
          throw DomainError("entries must be finite");
  }

  Matrix<Scalar> entries_;
  Generator generator_;
  std::vector<std::string> sources_;
};

/// (q, p) with p the nearest integer vector to Yq.
struct ApproxRecord {
  std::vector<std::int64_t> q;
  std::vector<std::int64_t> p;
  Scalar dist;  // |Yq - p|_inf
  std::int64_t qnorm = 0;
};

inline std::int64_t sup_norm(const std::vector<std::int64_t>& q) {
  std::int64_t s = 0;
  for (auto x : q) s = std::max(s, x < 0 ? -x : x);
  return s;
}

/// Nearest integer vector p to Yq and the residuals Yq - p.
inline ApproxRecord make_record(const SystemY& y, const std::vector<std::int64_t>& q) {
  if (q.size() != y.n()) throw DimensionMismatch("q has the wrong length");
  ApproxRecord r{q, std::vector<std::int64_t>(y.m()), Scalar(0), sup_norm(q)};
  if (y.is_exact()) {
    Rational worst = 0;
    for (std::size_t i = 0; i < y.m(); ++i) {
      Rational v = 0;
      for (std::size_t j = 0; j < y.n(); ++j) v += y(i, j).rational() * static_cast<long long>(q[j]);
      const BigInt p = round_to_bigint(to_float(v));
      r.p[i] = to_int64(p);
      Rational d = mp::abs(v - Rational(p));
      // Float rounding of v cannot pick the wrong neighbour by more than one.
      for (int s : {-1, 1}) {
        const Rational alt = mp::abs(v - Rational(p + s));
        if (alt < d) {
          d = alt;
          r.p[i] = to_int64(p + s);
        }
      }
      worst = std::max(worst, d);
    }
    r.dist = Scalar(worst);
    return r;
  }
  // Residuals under the rounding floor of the entries are indistinguishable from 0.
  const auto residual = [&](const SystemY& ys, std::vector<std::int64_t>& p_out, bool& numerically_zero) {
    Float worst = 0;
    numerically_zero = true;
    for (std::size_t i = 0; i < ys.m(); ++i) {
      Float v = 0, scale = 1;
      for (std::size_t j = 0; j < ys.n(); ++j)
        if (q[j] != 0) {
          const Float term = ys(i, j).to_float() * static_cast<long long>(q[j]);
          v += term;
          scale += mp::abs(term);
        }
      const BigInt p = round_to_bigint(v);
      p_out[i] = to_int64(p);
      const Float d = mp::abs(v - Float(p));
      numerically_zero = numerically_zero && d <= mp::ldexp(scale, -static_cast<int>(precision_bits()) + 16);
      worst = std::max(worst, d);
    }
    return worst;
  };
  bool zero = false;
  Float worst = residual(y, r.p, zero);
  if (zero && y.has_generator()) {
    // confirm at doubled precision before declaring an exact hit
    PrecisionScope scope(2 * precision_bits());
    worst = residual(y.at_current_precision(), r.p, zero);
  }
  r.dist = zero ? Scalar(0) : Scalar(worst);
  return r;
}

enum class FitMethod { tail_max, regression };

inline std::string to_string(FitMethod m) { return m == FitMethod::tail_max ? "tail-max" : "regression"; }

/// Exponent estimate from finite data.
struct ExponentFit {
  Float estimate = 0;                 // value for `method`
  FitMethod method = FitMethod::tail_max;
  Float tail_max = 0;                 // both statistics are always reported
  Float regression = 0;
  std::vector<std::size_t> used;      // indices into the input sequence
  bool infinite = false;              // +inf sentinel (rational point)
};

/// Least-squares slope of y against x.
inline Float fit_slope(const std::vector<Float>& x, const std::vector<Float>& y) {
  const std::size_t n = x.size();
  if (n < 2) return 0;
  Float mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<unsigned long>(n);
  my /= static_cast<unsigned long>(n);
  Float sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  return sxx == 0 ? Float(0) : Float(sxy / sxx);
}

/// Positive function of one real variable: the rates phi and psi.
class RateFunction {
 public:
  enum class Form { constant, power, expression, tabulated };

  static RateFunction constant(Scalar c) {
    RateFunction f(Form::constant);
    f.c_ = std::move(c);
    f.non_increasing_ = true;
    f.check_positive(f.c_.to_float());
    return f;
  }

  /// c * x^e
  static RateFunction power(Scalar c, Scalar e) {
    RateFunction f(Form::power);
    f.c_ = std::move(c);
    f.e_ = std::move(e);
    f.non_increasing_ = f.e_ <= Scalar(0);
    f.check_positive(f.c_.to_float());
    return f;
  }

  /// Expression in the variable x; `non_increasing` is the caller's claim.
  static RateFunction expression(const std::string& text, bool non_increasing) {
    RateFunction f(Form::expression);
    f.expr_ = Expr::parse(text, {"x"});
    f.non_increasing_ = non_increasing;
    return f;
  }

  /// Piecewise log-linear interpolation through (x, value); constant beyond the ends.
  static RateFunction tabulated(std::vector<Float> xs, std::vector<Float> ys) {
    if (xs.size() != ys.size() || xs.empty()) throw DimensionMismatch("table columns differ in length");
    RateFunction f(Form::tabulated);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (i && !(xs[i] > xs[i - 1])) throw DomainError("table abscissae must increase");
      f.check_positive(ys[i]);
    }
    f.non_increasing_ = true;
    for (std::size_t i = 1; i < ys.size(); ++i)
      if (ys[i] > ys[i - 1] * (1 + half_precision_tolerance())) f.non_increasing_ = false;
    f.xs_ = std::move(xs);
    f.ys_ = std::move(ys);
    return f;
  }

  Form form() const { return form_; }
  bool non_increasing() const { return non_increasing_; }
  bool is_constant() const { return form_ == Form::constant; }
  const std::vector<Float>& table_x() const { return xs_; }
  const std::vector<Float>& table_y() const { return ys_; }

  Float operator()(const Float& x) const {
    Float v;
    switch (form_) {
      case Form::constant: v = c_.to_float(); break;
      case Form::power: v = c_.to_float() * mp::pow(x, e_.to_float()); break;
      case Form::expression: v = expr_.eval({Scalar(x)}).to_float(); break;
      case Form::tabulated: v = interpolate(x); break;
    }
    check_positive(v);
    return v;
  }

  double eval_double(double x) const {
    switch (form_) {
      case Form::constant: return c_.to_double();
      case Form::power: return c_.to_double() * std::pow(x, e_.to_double());
      case Form::expression: return expr_.eval_double({x});
      case Form::tabulated: return interpolate(Float(x)).convert_to<double>();
    }
    return 0;
  }

  std::string describe() const {
    switch (form_) {
      case Form::constant: return c_.to_string();
      case Form::power: return c_.to_string() + "*x^(" + e_.to_string() + ")";
      case Form::expression: return expr_.source();
      case Form::tabulated: return "table[" + std::to_string(xs_.size()) + "]";
    }
    return {};
  }

  nlohmann::json to_json() const {
    switch (form_) {
      case Form::constant: return {{"form", "constant"}, {"c", c_.to_string()}};
      case Form::power: return {{"form", "power"}, {"c", c_.to_string()}, {"e", e_.to_string()}};
      case Form::expression:
        return {{"form", "expression"}, {"expr", expr_.source()}, {"non_increasing", non_increasing_}};
      case Form::tabulated: {
        nlohmann::json xs = nlohmann::json::array(), ys = nlohmann::json::array();
        for (std::size_t i = 0; i < xs_.size(); ++i) {
          xs.push_back(to_decimal_string(xs_[i]));
          ys.push_back(to_decimal_string(ys_[i]));
        }
        return {{"form", "tabulated"}, {"x", xs}, {"y", ys}};
      }
    }
    return {};
  }

  static RateFunction from_json(const nlohmann::json& j) {
    const auto form = j.at("form").get<std::string>();
    auto scalar = [&](const char* key) { return Expr::parse(j.at(key).get<std::string>()).eval(); };
    if (form == "constant") return constant(scalar("c"));
    if (form == "power") return power(scalar("c"), scalar("e"));
    if (form == "expression") return expression(j.at("expr").get<std::string>(), j.value("non_increasing", true));
    if (form == "tabulated") {
      std::vector<Float> xs, ys;
      for (const auto& v : j.at("x")) xs.push_back(parse_float(v.get<std::string>()));
      for (const auto& v : j.at("y")) ys.push_back(parse_float(v.get<std::string>()));
      return tabulated(std::move(xs), std::move(ys));
    }
    throw ParseError("unknown rate function form '" + form + "'");
  }

 private:
  explicit RateFunction(Form f) : form_(f) {}

  static void check_positive(const Float& v) {
    if (!(v > 0) || !mp::isfinite(v)) throw DomainError("rate function must be positive and finite");
  }

  Float interpolate(const Float& x) const {
    if (x <= xs_.front()) return ys_.front();
    if (x >= xs_.back()) return ys_.back();
    const auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - xs_.begin());
    const Float w = (x - xs_[i - 1]) / (xs_[i] - xs_[i - 1]);
    return mp::exp((1 - w) * mp::log(ys_[i - 1]) + w * mp::log(ys_[i]));
  }

  Form form_;
  Scalar c_{1}, e_{0};
  Expr expr_;
  std::vector<Float> xs_, ys_;
  bool non_increasing_ = true;
};

}  // namespace latflow
