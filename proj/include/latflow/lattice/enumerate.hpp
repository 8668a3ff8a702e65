#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "latflow/lattice/lll.hpp"

namespace latflow {

inline constexpr std::uint64_t kDefaultNodeBudget = 10'000'000;

/// Fincke-Pohst enumeration over an LLL-reduced copy of a column basis.
///
/// The tree search runs in long double on the reduced Gram-Schmidt data with
/// a slightly inflated radius; callers re-check candidates at full precision.
/// Only one of each pair +-v is visited (the last nonzero reduced coordinate
/// is positive).
class Enumerator {
 public:
  struct Status {
    std::uint64_t nodes = 0;
    bool exhausted = false;  // budget ran out before the tree was covered
  };

  /// Return value of a visitor: the squared radius to continue with (negative stops).
  using Visitor = std::function<long double(const std::vector<std::int64_t>& reduced, long double norm2)>;

  explicit Enumerator(const Matrix<Float>& basis, double delta = 0.99)
      : original_(basis), red_(lll(basis, delta)) {
    const std::size_t n = dim();
    mu_.assign(n * n, 0.0L);
    b_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      b_[i] = red_.gs.norms2[i].convert_to<long double>();
      for (std::size_t j = 0; j < i; ++j) mu_[i * n + j] = red_.gs.mu(i, j).convert_to<long double>();
    }
  }

  std::size_t dim() const { return original_.cols(); }
  const Matrix<Float>& original() const { return original_; }
  const Matrix<Float>& reduced() const { return red_.basis; }
  const IntMatrix& transform() const { return red_.transform; }
  const GramSchmidt& gs() const { return red_.gs; }

  /// Coefficients in the original basis of the vector with reduced coordinates x.
  std::vector<std::int64_t> to_original(const std::vector<std::int64_t>& x) const {
    const std::size_t n = dim();
    std::vector<std::int64_t> out(n, 0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) out[i] = detail::checked_mul_sub(out[i], -red_.transform(i, j), x[j]);
    return out;
  }

  /// Full-precision image of the reduced coordinates x.
  std::vector<Float> vector_of(const std::vector<std::int64_t>& x) const {
    std::vector<Float> v(red_.basis.rows(), Float(0));
    for (std::size_t j = 0; j < dim(); ++j) {
      if (x[j] == 0) continue;
      const Float c(static_cast<long long>(x[j]));
      for (std::size_t r = 0; r < v.size(); ++r) v[r] += c * red_.basis(r, j);
    }
    return v;
  }

  /// Visits every nonzero vector (up to sign) with |v|^2 <= radius2.
  Status run(long double radius2, const Visitor& visit, std::uint64_t budget = kDefaultNodeBudget) const {
    Search s{*this, visit, budget, radius2, std::vector<std::int64_t>(dim(), 0), {}};
    s.descend(dim() - 1, 0.0L, true);
    return s.status;
  }

 private:
  static constexpr long double kSlack = 1e-12L;

  struct Search {
    const Enumerator& e;
    const Visitor& visit;
    std::uint64_t budget;
    long double radius2;
    std::vector<std::int64_t> x;
    Status status;

    bool within(long double partial, long double d2) const {
      return radius2 >= 0 && partial + d2 <= radius2 * (1 + kSlack);
    }

    void descend(std::size_t i, long double partial, bool upper_zero) {
      const std::size_t n = e.dim();
      long double c = 0;
      for (std::size_t j = i + 1; j < n; ++j) c -= static_cast<long double>(x[j]) * e.mu_[j * n + i];
      const long double bi = e.b_[i];
      auto try_value = [&](std::int64_t v) -> bool {
        const long double d = static_cast<long double>(v) - c;
        const long double d2 = d * d * bi;
        if (!within(partial, d2)) return false;
        if (++status.nodes > budget) {
          status.exhausted = true;
          return false;
        }
        x[i] = v;
        const bool zero_here = upper_zero && v == 0;
        if (i == 0) {
          if (!zero_here) radius2 = visit(x, partial + d2);
        } else {
          descend(i - 1, partial + d2, zero_here);
        }
        x[i] = 0;
        return true;
      };
      // Zig-zag outward from the rounded center; with all higher coordinates
      // zero only v >= 0 is needed.
      const std::int64_t center = static_cast<std::int64_t>(std::llround(c));
      std::int64_t up = center, down = center - 1;
      bool up_open = true, down_open = !upper_zero || down >= 0;
      if (upper_zero && up < 0) up = 0;
      while ((up_open || down_open) && !status.exhausted) {
        const bool take_up = up_open && (!down_open || std::fabs(static_cast<long double>(up) - c) <=
                                                            std::fabs(static_cast<long double>(down) - c));
        if (take_up) {
          up_open = try_value(up);
          ++up;
        } else {
          down_open = try_value(down);
          --down;
          if (upper_zero && down < 0) down_open = false;
        }
      }
    }
  };

  Matrix<Float> original_;
  LllResult red_;
  std::vector<long double> mu_;
  std::vector<long double> b_;
};

inline Float norm2(const std::vector<Float>& v) {
  Float s = 0;
  for (const auto& x : v) s += x * x;
  return s;
}

/// Sign convention for witnesses: the last nonzero coordinate is positive.
inline void normalize_sign(std::vector<std::int64_t>& v) {
  for (std::size_t i = v.size(); i-- > 0;) {
    if (v[i] == 0) continue;
    if (v[i] < 0)
      for (auto& x : v) x = -x;
    return;
  }
}

}  // namespace latflow
