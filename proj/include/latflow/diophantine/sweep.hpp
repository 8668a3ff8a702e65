#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "latflow/diophantine/fixed.hpp"
#include "latflow/diophantine/types.hpp"

namespace latflow::detail {

/// Words of fixed-point fraction used at the current precision.
inline int sweep_words() {
  const unsigned bits = precision_bits();
  return bits <= 128 ? 2 : bits <= 256 ? 4 : 8;
}

/// Number of q in the half box {q != 0, |q|_inf <= Q, last nonzero coordinate > 0}.
inline std::uint64_t half_box_count(std::size_t n, std::int64_t q_max) {
  long double c = 1;
  for (std::size_t j = 0; j < n; ++j) c *= 2.0L * static_cast<long double>(q_max) + 1;
  c = (c - 1) / 2;
  return c > 1.8e19L ? ~std::uint64_t{0} : static_cast<std::uint64_t>(c);
}

/// Fixed-point units below which two sweep distances are indistinguishable:
/// accumulated rounding of the inner additions plus the P-bit error of the
/// starting products.
template <int L>
FixedFrac<L> sweep_tolerance(const SystemY& y, std::int64_t q_max) {
  const auto q = static_cast<long double>(q_max);
  long double units = 4 * (static_cast<long double>(y.n()) * q + 4);
  if (!y.is_exact()) {
    long double ymax = 1;
    for (std::size_t i = 0; i < y.m(); ++i)
      for (std::size_t j = 0; j < y.n(); ++j)
        ymax = std::max(ymax, std::fabs(static_cast<long double>(y(i, j).to_double())));
    units += 4 * q * static_cast<long double>(y.n()) * ymax *
             std::ldexp(1.0L, 64 * L - static_cast<int>(precision_bits()));
  }
  if (units >= 1.8e19L) return FixedFrac<L>::from_scaled(BigInt(1) << (64 * L - 8));
  return FixedFrac<L>::from_units(static_cast<std::uint64_t>(units));
}

/// Calls visit(q, acc, outer) for every q in the half box, where acc[i] is
/// Y_i q mod 1 in fixed point and outer = max_{j >= 2} |q_j|. The first
/// coordinate runs fastest; q is updated in place.
template <int L, class Visit>
void sweep_half_box(const SystemY& y, std::int64_t q_max, Visit&& visit) {
  using F = FixedFrac<L>;
  const std::size_t m = y.m(), n = y.n();
  std::vector<F> step(m), acc(m);
  for (std::size_t i = 0; i < m; ++i) step[i] = to_fixed<L>(y(i, 0));
  std::vector<std::int64_t> q(n, 0);
  std::vector<std::int64_t> outer(n, 0);  // outer[0] unused
  for (std::size_t j = 1; j < n; ++j) outer[j] = -q_max;
  for (;;) {
    std::int64_t last = 0, sup = 0;
    for (std::size_t j = 1; j < n; ++j) {
      if (outer[j] != 0) last = outer[j];
      sup = std::max(sup, outer[j] < 0 ? -outer[j] : outer[j]);
    }
    if (last >= 0) {
      const std::int64_t start = last == 0 ? 1 : -q_max;
      for (std::size_t i = 0; i < m; ++i) {
        Scalar s = y(i, 0) * Scalar(static_cast<long long>(start));
        for (std::size_t j = 1; j < n; ++j)
          if (outer[j] != 0) s = s + y(i, j) * Scalar(static_cast<long long>(outer[j]));
        acc[i] = to_fixed<L>(s);
      }
      for (std::size_t j = 1; j < n; ++j) q[j] = outer[j];
      for (std::int64_t q1 = start; q1 <= q_max; ++q1) {
        q[0] = q1;
        visit(static_cast<const std::vector<std::int64_t>&>(q), static_cast<const std::vector<F>&>(acc), sup);
        for (std::size_t i = 0; i < m; ++i) acc[i] += step[i];
      }
    }
    std::size_t j = 1;
    while (j < n && outer[j] == q_max) outer[j++] = -q_max;
    if (j >= n) break;
    ++outer[j];
  }
}

}  // namespace latflow::detail
