#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "latflow/core/scalar.hpp"
#include "latflow/diophantine/types.hpp"

namespace latflow {

/// A point t of the weight cone: k = m + n positive entries whose first m
/// and last n coordinates have equal sums.
class Weights {
 public:
  Weights(std::size_t m, std::size_t n, std::vector<Scalar> t) : m_(m), n_(n), t_(std::move(t)) {
    if (m < 1 || n < 1) throw DomainError("m and n must be at least 1");
    if (t_.size() != m + n) throw DimensionMismatch("weight vector must have m + n entries");
    Scalar expand = 0, contract = 0;
    for (std::size_t i = 0; i < t_.size(); ++i) {
      if (!(t_[i] > Scalar(0))) throw DomainError("weights must be strictly positive");
      (i < m ? expand : contract) += t_[i];
    }
    if (expand.is_exact() && contract.is_exact()) {
      if (expand != contract) throw DomainError("weights are not balanced");
    } else {
      const Float gap = mp::abs(expand.to_float() - contract.to_float());
      if (gap > half_precision_tolerance() * expand.to_float()) throw DomainError("weights are not balanced");
    }
  }

  std::size_t m() const { return m_; }
  std::size_t n() const { return n_; }
  std::size_t k() const { return m_ + n_; }
  const std::vector<Scalar>& t() const { return t_; }
  const Scalar& operator[](std::size_t i) const { return t_[i]; }

  /// |t| = sum of all coordinates (twice the expanding sum).
  Scalar norm() const {
    Scalar s = 0;
    for (const auto& x : t_) s += x;
    return s;
  }

  /// Sum of the expanding coordinates; equals the parameter on the central ray.
  Scalar ray_parameter() const {
    Scalar s = 0;
    for (std::size_t i = 0; i < m_; ++i) s += t_[i];
    return s;
  }

  Weights operator+(const Weights& o) const {
    if (o.m_ != m_ || o.n_ != n_) throw DimensionMismatch("weights of different shapes");
    std::vector<Scalar> s(k());
    for (std::size_t i = 0; i < k(); ++i) s[i] = t_[i] + o.t_[i];
    return Weights(m_, n_, std::move(s));
  }

  std::string to_string() const {
    std::string out = "(";
    for (std::size_t i = 0; i < t_.size(); ++i) out += (i ? ", " : "") + t_[i].to_string();
    return out + ")";
  }

 private:
  std::size_t m_, n_;
  std::vector<Scalar> t_;
};

/// (t/m, ..., t/m, t/n, ..., t/n); exact when t is.
inline Weights central_ray(std::size_t m, std::size_t n, const Scalar& t) {
  if (!(t > Scalar(0))) throw DomainError("ray parameter must be positive");
  std::vector<Scalar> w;
  for (std::size_t i = 0; i < m; ++i) w.push_back(t / Scalar(static_cast<long long>(m)));
  for (std::size_t j = 0; j < n; ++j) w.push_back(t / Scalar(static_cast<long long>(n)));
  return Weights(m, n, std::move(w));
}

/// Countable, uniformly discrete subset of the weight cone.
class WeightSet {
 public:
  enum class Kind { central_ray, weighted_ray, grid, explicit_list };

  /// Central-ray points with parameter t_min, t_min + step, ..., <= t_max.
  static WeightSet central(std::size_t m, std::size_t n, Scalar t_min, Scalar step, Scalar t_max) {
    WeightSet s(Kind::central_ray, m, n, step);
    for (Scalar t = t_min; t <= t_max; t += step) s.points_.push_back(central_ray(m, n, t));
    return s.finish();
  }

  /// s * direction for s = step, 2 step, ... while |s * direction| <= norm_cap.
  static WeightSet weighted_ray(const Weights& direction, Scalar step, Scalar norm_cap) {
    WeightSet s(Kind::weighted_ray, direction.m(), direction.n(), step * direction.norm());
    for (Scalar f = step; f * direction.norm() <= norm_cap; f += step) {
      std::vector<Scalar> t;
      for (const auto& x : direction.t()) t.push_back(x * f);
      s.points_.emplace_back(direction.m(), direction.n(), std::move(t));
    }
    return s.finish();
  }

  /// All balanced vectors with entries in step * Z_{>0} and |t| <= norm_cap.
  static WeightSet grid(std::size_t m, std::size_t n, Scalar step, Scalar norm_cap) {
    WeightSet s(Kind::grid, m, n, step);
    const auto max_units = static_cast<long long>(std::floor((norm_cap / step).to_double() / 2 + 1e-9));
    std::vector<std::vector<long long>> expand, contract;
    compositions(m, max_units, expand);
    compositions(n, max_units, contract);
    for (const auto& a : expand) {
      long long sa = 0;
      for (auto v : a) sa += v;
      for (const auto& b : contract) {
        long long sb = 0;
        for (auto v : b) sb += v;
        if (sa != sb) continue;
        std::vector<Scalar> t;
        for (auto v : a) t.push_back(step * Scalar(v));
        for (auto v : b) t.push_back(step * Scalar(v));
        s.points_.emplace_back(m, n, std::move(t));
      }
    }
    return s.finish();
  }

  static WeightSet explicit_list(std::vector<Weights> pts, Scalar spacing_floor) {
    if (pts.empty()) throw DomainError("empty weight list");
    WeightSet s(Kind::explicit_list, pts.front().m(), pts.front().n(), std::move(spacing_floor));
    s.points_ = std::move(pts);
    return s.finish();
  }

  Kind kind() const { return kind_; }
  const std::vector<Weights>& points() const { return points_; }
  const Scalar& spacing_floor() const { return spacing_; }

 private:
  WeightSet(Kind k, std::size_t m, std::size_t n, Scalar spacing) : kind_(k), m_(m), n_(n), spacing_(std::move(spacing)) {
    if (!(spacing_ > Scalar(0))) throw DomainError("spacing must be positive");
  }

  static void compositions(std::size_t parts, long long max_sum, std::vector<std::vector<long long>>& out) {
    std::vector<long long> cur(parts, 1);
    if (static_cast<long long>(parts) > max_sum) return;
    for (;;) {
      long long sum = 0;
      for (auto v : cur) sum += v;
      if (sum <= max_sum) out.push_back(cur);
      std::size_t i = 0;
      while (i < parts) {
        ++cur[i];
        long long s2 = 0;
        for (auto v : cur) s2 += v;
        if (s2 <= max_sum) break;
        cur[i] = 1;
        ++i;
      }
      if (i == parts) return;
    }
  }

  static Float distance(const Weights& a, const Weights& b) {
    Float s = 0;
    for (std::size_t i = 0; i < a.k(); ++i) {
      const Float d = (a[i] - b[i]).to_float();
      s += d * d;
    }
    return mp::sqrt(s);
  }

  WeightSet& finish() {
    if (points_.empty()) throw DomainError("weight set is empty");
    for (const auto& p : points_)
      if (p.m() != m_ || p.n() != n_) throw DimensionMismatch("weights of different shapes");
    std::stable_sort(points_.begin(), points_.end(), [](const Weights& a, const Weights& b) {
      const Scalar na = a.norm(), nb = b.norm();
      if (na != nb) return na < nb;
      for (std::size_t i = 0; i < a.k(); ++i)
        if (a[i] != b[i]) return a[i] < b[i];
      return false;
    });
    const Float floor = spacing_.to_float() * (1 - half_precision_tolerance());
    for (std::size_t i = 0; i < points_.size(); ++i)
      for (std::size_t j = i + 1; j < points_.size(); ++j) {
        if ((points_[j].norm() - points_[i].norm()).to_float() > floor * static_cast<unsigned long>(points_[i].k()))
          break;
        if (distance(points_[i], points_[j]) < floor) throw DomainError("weight set violates its spacing floor");
      }
    return *this;
  }

  Kind kind_;
  std::size_t m_, n_;
  Scalar spacing_;
  std::vector<Weights> points_;
};

/// diag(e^{t_1}, ..., e^{t_m}, e^{-t_{m+1}}, ..., e^{-t_k})
inline Matrix<Scalar> flow_matrix(const Weights& w) {
  Matrix<Scalar> g(w.k(), w.k());
  for (std::size_t i = 0; i < w.k(); ++i) {
    const Float ti = w[i].to_float();
    g(i, i) = Scalar(Float(mp::exp(i < w.m() ? ti : Float(-ti))));
  }
  return g;
}

/// [[I_m, Y], [0, I_n]]; exact when Y is.
inline Matrix<Scalar> unipotent(const SystemY& y) {
  const std::size_t m = y.m(), n = y.n();
  Matrix<Scalar> u = Matrix<Scalar>::identity(m + n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) u(i, m + j) = y(i, j);
  return u;
}

}  // namespace latflow
