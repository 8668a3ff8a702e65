#pragma once

#include <cmath>
#include <algorithm>
#include <cstdint>
#include <vector>

#include "latflow/core/matrix.hpp"
#include "latflow/core/numeric.hpp"
#include "latflow/core/random.hpp"

namespace latflow::testing {

/// Smallest |B w| over nonzero integer w with |w|_inf <= bound, by brute force.
inline Float brute_force_min(const Matrix<Float>& b, int bound, std::vector<std::int64_t>* argmin = nullptr) {
  const std::size_t k = b.cols();
  std::vector<std::int64_t> w(k, -bound);
  Float best = -1;
  for (;;) {
    bool zero = true;
    for (auto v : w) zero = zero && v == 0;
    if (!zero) {
      Float n2 = 0;
      for (std::size_t i = 0; i < b.rows(); ++i) {
        Float acc = 0;
        for (std::size_t j = 0; j < k; ++j) acc += b(i, j) * static_cast<long long>(w[j]);
        n2 += acc * acc;
      }
      if (best < 0 || n2 < best) {
        best = n2;
        if (argmin) *argmin = w;
      }
    }
    std::size_t i = 0;
    while (i < k && w[i] == bound) w[i++] = -bound;
    if (i == k) break;
    ++w[i];
  }
  return mp::sqrt(best);
}

/// Shortest vector length of a rank-2 lattice by Lagrange-Gauss reduction.
inline Float gauss_reduced_min(const Matrix<Float>& b) {
  std::vector<Float> u = b.col(0), v = b.col(1);
  const auto dot = [](const std::vector<Float>& x, const std::vector<Float>& y) {
    Float s = 0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
  };
  if (dot(u, u) > dot(v, v)) std::swap(u, v);
  for (int it = 0; it < 10000; ++it) {
    const Float mu = mp::round(dot(u, v) / dot(u, u));
    for (std::size_t i = 0; i < v.size(); ++i) v[i] -= mu * u[i];
    if (dot(v, v) >= dot(u, u)) break;
    std::swap(u, v);
  }
  return mp::sqrt(dot(u, u));
}

/// Random integer matrix of determinant 1 built from elementary column operations.
inline IntMatrix random_unimodular(std::size_t k, CounterRng& rng, int steps = 12) {
  IntMatrix u = IntMatrix::identity(k);
  for (int s = 0; s < steps; ++s) {
    const auto a = static_cast<std::size_t>(rng.integer(0, static_cast<std::int64_t>(k) - 1));
    auto b = static_cast<std::size_t>(rng.integer(0, static_cast<std::int64_t>(k) - 2));
    if (b >= a) ++b;
    const std::int64_t f = rng.integer(-2, 2);
    for (std::size_t i = 0; i < k; ++i) u(i, a) += f * u(i, b);
  }
  return u;
}

inline Matrix<Float> to_float_matrix(const IntMatrix& u) {
  return u.map([](std::int64_t v) { return Float(static_cast<long long>(v)); });
}

/// Unit-ball volume in dimension k from the Gamma function.
inline double unit_ball_volume(std::size_t k) {
  const double h = static_cast<double>(k) / 2;
  return std::pow(M_PI, h) / std::tgamma(h + 1);
}

inline double rel_diff(const Float& a, const Float& b) {
  const Float scale = std::max(Float(mp::abs(a)), Float(mp::abs(b)));
  return scale == 0 ? 0.0 : Float(mp::abs(a - b) / scale).convert_to<double>();
}

}  // namespace latflow::testing
