#pragma once

#include <cstdint>
#include <numeric>
#include <vector>

#include "latflow/core/matrix.hpp"
#include "latflow/core/numeric.hpp"

namespace latflow::integer {

inline std::int64_t checked(__int128 v) {
  if (v > std::numeric_limits<std::int64_t>::max() || v < std::numeric_limits<std::int64_t>::min())
    throw NumericOverflow("integer matrix entry exceeds 64 bits");
  return static_cast<std::int64_t>(v);
}

struct ExtGcd {
  std::int64_t g, x, y;  // g = x*a + y*b, g >= 0
};

inline ExtGcd ext_gcd(std::int64_t a, std::int64_t b) {
  std::int64_t old_r = a, r = b, old_s = 1, s = 0, old_t = 0, t = 1;
  while (r != 0) {
    const std::int64_t q = old_r / r;
    std::int64_t tmp = old_r - q * r;
    old_r = r, r = tmp;
    tmp = old_s - q * s;
    old_s = s, s = tmp;
    tmp = old_t - q * t;
    old_t = t, t = tmp;
  }
  if (old_r < 0) return {-old_r, -old_s, -old_t};
  return {old_r, old_s, old_t};
}

/// Basis (as columns) of {x in Z^c : A x = 0}; saturated by construction.
inline IntMatrix kernel(const IntMatrix& a) {
  const std::size_t r = a.rows(), c = a.cols();
  IntMatrix m = a;
  IntMatrix w = IntMatrix::identity(c);
  // Column operations [A; W] -> [A W; W] bringing A W to column echelon form.
  auto combine = [&](std::size_t p, std::size_t q, std::int64_t a11, std::int64_t a12, std::int64_t a21,
                     std::int64_t a22) {
    // (col_p, col_q) <- (a11 col_p + a21 col_q, a12 col_p + a22 col_q)
    for (auto* mat : {&m, &w}) {
      for (std::size_t i = 0; i < mat->rows(); ++i) {
        const __int128 x = (*mat)(i, p), y = (*mat)(i, q);
        (*mat)(i, p) = checked(a11 * x + a21 * y);
        (*mat)(i, q) = checked(a12 * x + a22 * y);
      }
    }
  };
  std::size_t pivot_col = 0;
  for (std::size_t row = 0; row < r && pivot_col < c; ++row) {
    for (std::size_t j = pivot_col + 1; j < c; ++j) {
      if (m(row, j) == 0) continue;
      const std::int64_t x = m(row, pivot_col), y = m(row, j);
      const ExtGcd e = ext_gcd(x, y);
      // [e.x, -y/g; e.y, x/g] has determinant 1.
      combine(pivot_col, j, e.x, -y / e.g, e.y, x / e.g);
    }
    if (m(row, pivot_col) != 0) ++pivot_col;
  }
  IntMatrix out(c, c - pivot_col);
  for (std::size_t j = pivot_col; j < c; ++j)
    for (std::size_t i = 0; i < c; ++i) out(i, j - pivot_col) = w(i, j);
  return out;
}

inline std::int64_t dot(const IntMatrix& b, std::size_t i, std::size_t j) {
  __int128 acc = 0;
  for (std::size_t r = 0; r < b.rows(); ++r) acc += static_cast<__int128>(b(r, i)) * b(r, j);
  return checked(acc);
}

/// Pairwise (Gauss-style) reduction of integer columns; deterministic and exact.
inline void pair_reduce(IntMatrix& b) {
  const std::size_t n = b.cols();
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        const std::int64_t bb = dot(b, j, j);
        if (bb == 0) continue;
        const long double ratio = static_cast<long double>(dot(b, i, j)) / static_cast<long double>(bb);
        const auto q = static_cast<std::int64_t>(std::llround(ratio));
        if (q == 0) continue;
        IntMatrix trial = b;
        for (std::size_t rr = 0; rr < b.rows(); ++rr)
          trial(rr, i) = checked(static_cast<__int128>(b(rr, i)) - static_cast<__int128>(q) * b(rr, j));
        if (dot(trial, i, i) < dot(b, i, i)) {
          b = std::move(trial);
          changed = true;
        }
      }
    // Shorter columns first.
    for (std::size_t i = 1; i < n; ++i)
      for (std::size_t j = i; j > 0 && dot(b, j, j) < dot(b, j - 1, j - 1); --j) b.swap_cols(j, j - 1);
  }
}

/// Exact determinant of a square integer matrix (Bareiss).
inline BigInt determinant(const Matrix<BigInt>& in) {
  Matrix<BigInt> a = in;
  const std::size_t n = a.rows();
  if (n == 0) return 1;
  BigInt prev = 1;
  int sign = 1;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (a(k, k) == 0) {
      std::size_t p = k + 1;
      while (p < n && a(p, k) == 0) ++p;
      if (p == n) return 0;
      for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(p, j));
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < n; ++i)
      for (std::size_t j = k + 1; j < n; ++j) a(i, j) = (a(i, j) * a(k, k) - a(i, k) * a(k, j)) / prev;
    prev = a(k, k);
  }
  return sign * a(n - 1, n - 1);
}

/// Row Hermite normal form of the row lattice of `a` (zero rows dropped); unique per lattice.
inline IntMatrix hermite_rows(const IntMatrix& a) {
  IntMatrix m = a;
  const std::size_t rows = m.rows(), cols = m.cols();
  std::size_t pr = 0;
  for (std::size_t c = 0; c < cols && pr < rows; ++c) {
    for (std::size_t i = pr + 1; i < rows; ++i) {
      if (m(i, c) == 0) continue;
      const ExtGcd e = ext_gcd(m(pr, c), m(i, c));
      const std::int64_t x = m(pr, c) / e.g, y = m(i, c) / e.g;
      for (std::size_t j = 0; j < cols; ++j) {
        const __int128 u = m(pr, j), v = m(i, j);
        m(pr, j) = checked(e.x * u + e.y * v);
        m(i, j) = checked(-y * u + x * v);
      }
    }
    if (m(pr, c) == 0) continue;
    if (m(pr, c) < 0)
      for (std::size_t j = 0; j < cols; ++j) m(pr, j) = -m(pr, j);
    for (std::size_t i = 0; i < pr; ++i) {
      std::int64_t q = m(i, c) / m(pr, c);
      if (m(i, c) - q * m(pr, c) < 0) --q;
      if (q == 0) continue;
      for (std::size_t j = 0; j < cols; ++j) m(i, j) = checked(static_cast<__int128>(m(i, j)) - static_cast<__int128>(q) * m(pr, j));
    }
    ++pr;
  }
  IntMatrix out(pr, cols);
  for (std::size_t i = 0; i < pr; ++i)
    for (std::size_t j = 0; j < cols; ++j) out(i, j) = m(i, j);
  return out;
}

inline std::int64_t gcd_of(const std::vector<std::int64_t>& v) {
  std::int64_t g = 0;
  for (auto x : v) g = std::gcd(g, x);
  return g;
}

}  // namespace latflow::integer
