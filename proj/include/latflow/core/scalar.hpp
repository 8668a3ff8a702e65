#pragma once

#include <string>
#include <variant>

#include "latflow/core/matrix.hpp"
#include "latflow/core/numeric.hpp"

namespace latflow {

/// A real quantity held either as an exact rational or as a P-bit float.
///
/// Exact values stay exact under +, -, *, /. Mixing in a float value, or
/// asking for a transcendental function, drops to float mode at the working
/// precision.
class Scalar {
 public:
  enum class Mode { exact, floating };

  Scalar() : value_(Rational(0)) {}
  Scalar(long long v) : value_(Rational(v)) {}  // NOLINT: integers are exact
  Scalar(int v) : value_(Rational(v)) {}        // NOLINT
  explicit Scalar(Rational r) : value_(std::move(r)) {}
  explicit Scalar(Float f) : value_(std::move(f)), bits_(precision_bits()) {}

  static Scalar exact(Rational r) { return Scalar(std::move(r)); }
  static Scalar floating(const Float& f) { return Scalar(at_working_precision(f)); }

  Mode mode() const { return is_exact() ? Mode::exact : Mode::floating; }
  bool is_exact() const { return std::holds_alternative<Rational>(value_); }
  /// Mantissa width of a float value; 0 in exact mode.
  unsigned precision() const { return is_exact() ? 0 : bits_; }

  const Rational& rational() const {
    if (!is_exact()) throw DomainError("scalar is not exact");
    return std::get<Rational>(value_);
  }

  /// Value as a float at the current working precision.
  Float to_float() const {
    if (is_exact()) return latflow::to_float(std::get<Rational>(value_));
    return at_working_precision(std::get<Float>(value_));
  }

  double to_double() const {
    if (is_exact()) return std::get<Rational>(value_).convert_to<double>();
    return std::get<Float>(value_).convert_to<double>();
  }

  bool is_integer() const { return is_exact() && mp::denominator(rational()) == 1; }

  /// "p/q" for exact values, a round-trip decimal for floats.
  std::string to_string() const {
    if (is_exact()) return latflow::to_string(rational());
    return to_decimal_string(std::get<Float>(value_));
  }

  /// Inverse of to_string() for the given mode.
  static Scalar parse(const std::string& text, Mode mode) {
    if (mode == Mode::exact) return Scalar(parse_rational(text));
    return Scalar(parse_float(text));
  }

  Scalar operator-() const {
    if (is_exact()) return Scalar(Rational(-rational()));
    return Scalar(Float(-std::get<Float>(value_)));
  }

  friend Scalar operator+(const Scalar& a, const Scalar& b) {
    if (a.is_exact() && b.is_exact()) return Scalar(Rational(a.rational() + b.rational()));
    return Scalar(Float(a.to_float() + b.to_float()));
  }
  friend Scalar operator-(const Scalar& a, const Scalar& b) { return a + (-b); }
  friend Scalar operator*(const Scalar& a, const Scalar& b) {
    if (a.is_exact() && b.is_exact()) return Scalar(Rational(a.rational() * b.rational()));
    return Scalar(Float(a.to_float() * b.to_float()));
  }
  friend Scalar operator/(const Scalar& a, const Scalar& b) {
    if (b.is_exact() && b.rational() == 0) throw DomainError("division by zero");
    if (a.is_exact() && b.is_exact()) return Scalar(Rational(a.rational() / b.rational()));
    return Scalar(Float(a.to_float() / b.to_float()));
  }
  Scalar& operator+=(const Scalar& o) { return *this = *this + o; }
  Scalar& operator-=(const Scalar& o) { return *this = *this - o; }
  Scalar& operator*=(const Scalar& o) { return *this = *this * o; }

  friend bool operator==(const Scalar& a, const Scalar& b) {
    if (a.is_exact() && b.is_exact()) return a.rational() == b.rational();
    return a.to_float() == b.to_float();
  }
  friend bool operator<(const Scalar& a, const Scalar& b) {
    if (a.is_exact() && b.is_exact()) return a.rational() < b.rational();
    return a.to_float() < b.to_float();
  }
  friend bool operator>(const Scalar& a, const Scalar& b) { return b < a; }
  friend bool operator<=(const Scalar& a, const Scalar& b) { return !(b < a); }
  friend bool operator>=(const Scalar& a, const Scalar& b) { return !(a < b); }

 private:
  std::variant<Rational, Float> value_;
  unsigned bits_ = 0;
};

inline Matrix<Float> to_float(const Matrix<Scalar>& m) {
  return m.map([](const Scalar& s) { return s.to_float(); });
}

inline bool all_exact(const Matrix<Scalar>& m) {
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      if (!m(i, j).is_exact()) return false;
  return true;
}

/// Determinant by Gaussian elimination with partial pivoting (exact for rationals).
template <class T>
T determinant(Matrix<T> a) {
  if (a.rows() != a.cols()) throw DimensionMismatch("determinant of a non-square matrix");
  const std::size_t n = a.rows();
  T det(1);
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t pivot = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (mp::abs(a(r, c)) > mp::abs(a(pivot, c))) pivot = r;
    if (a(pivot, c) == 0) return T(0);
    if (pivot != c) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(pivot, j), a(c, j));
      det = -det;
    }
    det *= a(c, c);
    for (std::size_t r = c + 1; r < n; ++r) {
      if (a(r, c) == 0) continue;
      T f = a(r, c) / a(c, c);
      for (std::size_t j = c; j < n; ++j) a(r, j) -= f * a(c, j);
    }
  }
  return det;
}

inline Scalar determinant(const Matrix<Scalar>& m) {
  if (all_exact(m)) return Scalar(determinant(m.map([](const Scalar& s) { return s.rational(); })));
  return Scalar(determinant(to_float(m)));
}

}  // namespace latflow
