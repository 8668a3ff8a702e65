#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "latflow/diophantine/types.hpp"

namespace latflow {

/// The row (x, x^2, ..., x^n).
inline SystemY mahler_curve(std::size_t n, const Scalar& x) {
  if (n < 1) throw DomainError("mahler_curve needs n >= 1");
  Matrix<Scalar> e(1, n);
  Scalar p = x;
  for (std::size_t j = 0; j < n; ++j) {
    e(0, j) = p;
    p = p * x;
  }
  return SystemY(std::move(e));
}

/// x -> (x, x A' + a0) for x in R^s, with A' of size s x (n - s).
class AffineSubspace {
 public:
  AffineSubspace(Matrix<Scalar> a_prime, std::vector<Scalar> a0) : a_prime_(std::move(a_prime)), a0_(std::move(a0)) {
    if (a_prime_.rows() < 1) throw DimensionMismatch("affine subspace needs s >= 1");
    if (a_prime_.cols() != a0_.size()) throw DimensionMismatch("a0 must have n - s entries");
    if (a0_.empty()) throw DimensionMismatch("affine subspace needs s < n");
  }

  std::size_t s() const { return a_prime_.rows(); }
  std::size_t n() const { return a_prime_.rows() + a_prime_.cols(); }
  const Matrix<Scalar>& a_prime() const { return a_prime_; }
  const std::vector<Scalar>& a0() const { return a0_; }

  /// A = [a0; A'] in M_{s+1, n-s}.
  Matrix<Scalar> a() const {
    Matrix<Scalar> out(s() + 1, a0_.size());
    for (std::size_t j = 0; j < a0_.size(); ++j) out(0, j) = a0_[j];
    for (std::size_t i = 0; i < s(); ++i)
      for (std::size_t j = 0; j < a0_.size(); ++j) out(i + 1, j) = a_prime_(i, j);
    return out;
  }

  Matrix<Scalar> row(const std::vector<Scalar>& x) const {
    if (x.size() != s()) throw DimensionMismatch("affine subspace parameter must have s entries");
    Matrix<Scalar> e(1, n());
    for (std::size_t i = 0; i < s(); ++i) e(0, i) = x[i];
    for (std::size_t j = 0; j < a0_.size(); ++j) {
      Scalar v = a0_[j];
      for (std::size_t i = 0; i < s(); ++i) v = v + x[i] * a_prime_(i, j);
      e(0, s() + j) = v;
    }
    return e;
  }

  SystemY operator()(const std::vector<Scalar>& x) const { return SystemY(row(x)); }

 private:
  Matrix<Scalar> a_prime_;
  std::vector<Scalar> a0_;
};

/// Polynomial with Scalar coefficients, lowest degree first.
using Polynomial = std::vector<Scalar>;

inline std::vector<Polynomial> default_mahler_polynomials(std::size_t n) {
  std::vector<Polynomial> f;
  for (std::size_t j = 1; j <= n; ++j) {
    Polynomial p(j + 1, Scalar(0));
    p[j] = Scalar(1);
    f.push_back(std::move(p));
  }
  return f;
}

/// p(X) by Horner's rule with matrix products.
inline Matrix<Scalar> evaluate_polynomial(const Polynomial& p, const Matrix<Scalar>& x) {
  const std::size_t m = x.rows();
  Matrix<Scalar> acc(m, m, Scalar(0));
  for (std::size_t d = p.size(); d-- > 0;) {
    acc = acc * x;
    for (std::size_t i = 0; i < m; ++i) acc(i, i) = acc(i, i) + p[d];
  }
  return acc;
}

/// The m x mn block row (f_1(X), ..., f_n(X)).
inline SystemY matrix_mahler(const std::vector<Polynomial>& f, const Matrix<Scalar>& x) {
  if (x.rows() != x.cols() || x.rows() == 0) throw DimensionMismatch("X must be square");
  if (f.empty()) throw DomainError("matrix_mahler needs at least one function");
  const std::size_t m = x.rows();
  Matrix<Scalar> e(m, m * f.size());
  for (std::size_t b = 0; b < f.size(); ++b) {
    const Matrix<Scalar> block = evaluate_polynomial(f[b], x);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) e(i, b * m + j) = block(i, j);
  }
  return SystemY(std::move(e));
}

/// A parameterized family x in U (an axis-aligned box in R^d) -> M_{m,n}.
class ManifoldSpec {
 public:
  using Evaluator = std::function<Matrix<Scalar>(const std::vector<Scalar>&)>;

  std::size_t d() const { return lo_.size(); }
  std::size_t m() const { return m_; }
  std::size_t n() const { return n_; }
  const std::string& family() const { return family_; }
  const std::vector<Scalar>& lo() const { return lo_; }
  const std::vector<Scalar>& hi() const { return hi_; }

  bool contains(const std::vector<Scalar>& x) const {
    if (x.size() != d()) return false;
    for (std::size_t i = 0; i < d(); ++i)
      if (x[i] < lo_[i] || hi_[i] < x[i]) return false;
    return true;
  }

  /// Y = F(x). Float parameters are exact at the precision they were drawn at,
  /// so the entries are recomputed when the working precision rises.
  SystemY operator()(const std::vector<Scalar>& x) const {
    if (x.size() != d()) throw DimensionMismatch("parameter has the wrong dimension");
    if (!contains(x)) throw DomainError("parameter lies outside the domain");
    const Evaluator eval = eval_;
    return SystemY::from_generator(m_, n_, [eval, x] { return eval(x); });
  }

  static ManifoldSpec mahler(std::size_t n, std::vector<Scalar> lo, std::vector<Scalar> hi) {
    ManifoldSpec f("mahler_curve", 1, n, std::move(lo), std::move(hi), 1);
    f.params_ = {{"n", n}};
    f.eval_ = [n](const std::vector<Scalar>& x) { return mahler_curve(n, x[0]).entries(); };
    return f;
  }

  static ManifoldSpec affine(const AffineSubspace& a, std::vector<Scalar> lo, std::vector<Scalar> hi) {
    ManifoldSpec f("affine", 1, a.n(), std::move(lo), std::move(hi), a.s());
    nlohmann::json ap = nlohmann::json::array();
    for (std::size_t i = 0; i < a.s(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (std::size_t j = 0; j < a.a0().size(); ++j) row.push_back(a.a_prime()(i, j).to_string());
      ap.push_back(row);
    }
    nlohmann::json a0 = nlohmann::json::array();
    for (const auto& v : a.a0()) a0.push_back(v.to_string());
    f.params_ = {{"A_prime", ap}, {"a0", a0}};
    f.eval_ = [a](const std::vector<Scalar>& x) { return a.row(x); };
    return f;
  }

  /// Parameter X in M_{m,m} is read row-major from x (d = m^2).
  static ManifoldSpec matrix(std::vector<Polynomial> fs, std::size_t m, std::vector<Scalar> lo, std::vector<Scalar> hi) {
    ManifoldSpec f("matrix_mahler", m, m * fs.size(), std::move(lo), std::move(hi), m * m);
    nlohmann::json coeffs = nlohmann::json::array();
    for (const auto& p : fs) {
      nlohmann::json c = nlohmann::json::array();
      for (const auto& v : p) c.push_back(v.to_string());
      coeffs.push_back(c);
    }
    f.params_ = {{"m", m}, {"f", coeffs}};
    f.eval_ = [fs, m](const std::vector<Scalar>& x) {
      Matrix<Scalar> xm(m, m);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) xm(i, j) = x[i * m + j];
      return matrix_mahler(fs, xm).entries();
    };
    return f;
  }

  /// Entries are expressions in x1..xd (x is accepted when d = 1).
  static ManifoldSpec polynomial(std::size_t m, std::size_t n, std::vector<std::string> entries, std::vector<Scalar> lo,
                                 std::vector<Scalar> hi) {
    if (entries.size() != m * n) throw DimensionMismatch("entry count does not match m x n");
    const std::size_t d = lo.size();
    ManifoldSpec f("polynomial", m, n, std::move(lo), std::move(hi), d);
    std::vector<std::string> names;
    for (std::size_t i = 1; i <= d; ++i) names.push_back("x" + std::to_string(i));
    if (d == 1) names.push_back("x");
    std::vector<Expr> exprs;
    for (const auto& e : entries) exprs.push_back(Expr::parse(e, names));
    f.params_ = {{"m", m}, {"n", n}, {"entries", entries}};
    f.eval_ = [exprs, m, n, d](const std::vector<Scalar>& x) {
      std::vector<Scalar> args = x;
      if (d == 1) args.push_back(x[0]);
      Matrix<Scalar> e(m, n);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) e(i, j) = exprs[i * n + j].eval(args);
      return e;
    };
    return f;
  }

  /// Same family read through x = scale * x' + shift (scale > 0 per axis).
  ManifoldSpec reparameterized(const std::vector<Scalar>& scale, const std::vector<Scalar>& shift) const {
    if (scale.size() != d() || shift.size() != d()) throw DimensionMismatch("reparameterization has the wrong dimension");
    ManifoldSpec f = *this;
    for (std::size_t i = 0; i < d(); ++i) {
      if (!(scale[i] > Scalar(0))) throw DomainError("reparameterization scale must be positive");
      f.lo_[i] = (lo_[i] - shift[i]) / scale[i];
      f.hi_[i] = (hi_[i] - shift[i]) / scale[i];
    }
    const Evaluator inner = eval_;
    f.eval_ = [inner, scale, shift](const std::vector<Scalar>& x) {
      std::vector<Scalar> y(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) y[i] = scale[i] * x[i] + shift[i];
      return inner(y);
    };
    nlohmann::json sc = nlohmann::json::array(), sh = nlohmann::json::array();
    for (std::size_t i = 0; i < d(); ++i) {
      sc.push_back(scale[i].to_string());
      sh.push_back(shift[i].to_string());
    }
    f.reparam_ = {{"scale", sc}, {"shift", sh}};
    return f;
  }

  nlohmann::json to_json() const {
    nlohmann::json lo = nlohmann::json::array(), hi = nlohmann::json::array();
    for (std::size_t i = 0; i < d(); ++i) {
      lo.push_back(lo_[i].to_string());
      hi.push_back(hi_[i].to_string());
    }
    nlohmann::json j = params_;
    j["family"] = family_;
    j["domain"] = {{"lo", lo}, {"hi", hi}};
    if (!reparam_.is_null()) {
      // The stored domain is the original one; reparameterization is replayed on load.
      nlohmann::json olo = nlohmann::json::array(), ohi = nlohmann::json::array();
      for (std::size_t i = 0; i < d(); ++i) {
        const Scalar sc = evaluate_expression(reparam_["scale"][i].get<std::string>());
        const Scalar sh = evaluate_expression(reparam_["shift"][i].get<std::string>());
        olo.push_back((lo_[i] * sc + sh).to_string());
        ohi.push_back((hi_[i] * sc + sh).to_string());
      }
      j["domain"] = {{"lo", olo}, {"hi", ohi}};
      j["reparameterize"] = reparam_;
    }
    return j;
  }

  static ManifoldSpec from_json(const nlohmann::json& j) {
    const auto scalars = [](const nlohmann::json& arr) {
      std::vector<Scalar> out;
      for (const auto& v : arr) out.push_back(evaluate_expression(v.is_string() ? v.get<std::string>() : v.dump()));
      return out;
    };
    const std::string family = j.at("family").get<std::string>();
    std::vector<Scalar> lo = scalars(j.at("domain").at("lo")), hi = scalars(j.at("domain").at("hi"));
    ManifoldSpec f;
    if (family == "mahler_curve") {
      f = mahler(j.at("n").get<std::size_t>(), lo, hi);
    } else if (family == "affine") {
      const auto& ap = j.at("A_prime");
      const std::vector<Scalar> a0 = scalars(j.at("a0"));
      Matrix<Scalar> a(ap.size(), a0.size());
      for (std::size_t i = 0; i < ap.size(); ++i) {
        const auto row = scalars(ap[i]);
        if (row.size() != a0.size()) throw DimensionMismatch("A_prime rows must have n - s entries");
        for (std::size_t c = 0; c < row.size(); ++c) a(i, c) = row[c];
      }
      f = affine(AffineSubspace(a, a0), lo, hi);
    } else if (family == "matrix_mahler") {
      std::vector<Polynomial> fs;
      for (const auto& p : j.at("f")) fs.push_back(scalars(p));
      f = matrix(fs, j.at("m").get<std::size_t>(), lo, hi);
    } else if (family == "polynomial") {
      f = polynomial(j.at("m").get<std::size_t>(), j.at("n").get<std::size_t>(),
                     j.at("entries").get<std::vector<std::string>>(), lo, hi);
    } else {
      throw ParseError("unknown manifold family '" + family + "'");
    }
    if (j.contains("reparameterize"))
      f = f.reparameterized(scalars(j["reparameterize"].at("scale")), scalars(j["reparameterize"].at("shift")));
    return f;
  }

 private:
  ManifoldSpec() = default;
  ManifoldSpec(std::string family, std::size_t m, std::size_t n, std::vector<Scalar> lo, std::vector<Scalar> hi,
               std::size_t d)
      : family_(std::move(family)), m_(m), n_(n), lo_(std::move(lo)), hi_(std::move(hi)) {
    if (lo_.size() != d || hi_.size() != d) throw DimensionMismatch("domain box must have dimension " + std::to_string(d));
    for (std::size_t i = 0; i < d; ++i)
      if (!(lo_[i] < hi_[i])) throw DomainError("domain box must have lo < hi");
  }

  std::string family_;
  std::size_t m_ = 0, n_ = 0;
  std::vector<Scalar> lo_, hi_;
  nlohmann::json params_ = nlohmann::json::object();
  nlohmann::json reparam_;
  Evaluator eval_;
};

}  // namespace latflow
