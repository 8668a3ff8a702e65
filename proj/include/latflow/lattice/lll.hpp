#pragma once

#include <cstdint>
#include <vector>

#include "latflow/core/matrix.hpp"
#include "latflow/core/numeric.hpp"
#include "latflow/core/scalar.hpp"

namespace latflow {

/// Gram-Schmidt data of a column basis: b*_i = b_i - sum_{j<i} mu(i,j) b*_j.
struct GramSchmidt {
  Matrix<Float> mu;
  std::vector<Float> norms2;  // |b*_i|^2
};

inline Float dot_col(const Matrix<Float>& b, std::size_t i, std::size_t j) {
  Float acc = 0;
  for (std::size_t r = 0; r < b.rows(); ++r) acc += b(r, i) * b(r, j);
  return acc;
}

inline GramSchmidt gram_schmidt(const Matrix<Float>& b) {
  const std::size_t n = b.cols();
  GramSchmidt gs{Matrix<Float>(n, n, Float(0)), std::vector<Float>(n)};
  Matrix<Float> star = b;
  for (std::size_t i = 0; i < n; ++i) {
    gs.mu(i, i) = 1;
    for (std::size_t j = 0; j < i; ++j) {
      Float d = 0;
      for (std::size_t r = 0; r < b.rows(); ++r) d += b(r, i) * star(r, j);
      gs.mu(i, j) = d / gs.norms2[j];
      for (std::size_t r = 0; r < b.rows(); ++r) star(r, i) -= gs.mu(i, j) * star(r, j);
    }
    Float s = 0;
    for (std::size_t r = 0; r < b.rows(); ++r) s += star(r, i) * star(r, i);
    gs.norms2[i] = s;
  }
  return gs;
}

/// Throws NonInvertibleBasis when some Gram-Schmidt vector is lost to
/// cancellation, i.e. |b_i| / |b*_i| exceeds 2^{P/2}.
inline void check_resolvable(const Matrix<Float>& b, const GramSchmidt& gs) {
  const Float limit = mp::ldexp(Float(1), static_cast<int>(precision_bits()));
  for (std::size_t i = 0; i < b.cols(); ++i) {
    const Float len2 = dot_col(b, i, i);
    if (gs.norms2[i] <= 0 || len2 > limit * gs.norms2[i])
      throw NonInvertibleBasis("Gram matrix is singular at " + std::to_string(precision_bits()) +
                               " bits (column " + std::to_string(i) + ")");
  }
}

namespace detail {

inline std::int64_t checked_mul_sub(std::int64_t a, std::int64_t r, std::int64_t b) {
  std::int64_t prod = 0, out = 0;
  if (__builtin_mul_overflow(r, b, &prod) || __builtin_sub_overflow(a, prod, &out))
    throw NumericOverflow("basis transform entry exceeds 64 bits");
  return out;
}

}  // namespace detail

struct LllResult {
  Matrix<Float> basis;  // reduced basis, recomputed as original * transform
  IntMatrix transform;  // unimodular, basis = original * transform
  GramSchmidt gs;
  std::size_t swaps = 0;
};

/// LLL reduction of the columns of `basis` (rows >= cols allowed).
inline LllResult lll(const Matrix<Float>& basis, double delta = 0.99) {
  if (!(delta > 0.25 && delta < 1)) throw DomainError("LLL parameter must lie in (1/4, 1)");
  const std::size_t n = basis.cols();
  if (n == 0 || basis.rows() < n) throw NonInvertibleBasis("basis has more columns than rows");

  LllResult res{basis, IntMatrix::identity(n), gram_schmidt(basis), 0};
  check_resolvable(basis, res.gs);
  auto refresh_col = [&](std::size_t c) {
    for (std::size_t r = 0; r < basis.rows(); ++r) {
      Float acc = 0;
      for (std::size_t l = 0; l < n; ++l)
        if (res.transform(l, c) != 0) acc += basis(r, l) * static_cast<long long>(res.transform(l, c));
      res.basis(r, c) = acc;
    }
  };

  const Float half = Float(0.5) + half_precision_tolerance();
  std::size_t k = 1;
  const std::size_t max_iterations = 100000 * n;
  for (std::size_t iter = 0; k < n; ++iter) {
    if (iter > max_iterations) throw PrecisionInsufficient("LLL does not terminate at this precision");
    // Size reduction, repeated until the recomputed coefficients are small.
    for (int pass = 0;; ++pass) {
      bool changed = false;
      for (std::size_t jj = k; jj-- > 0;) {
        if (mp::abs(res.gs.mu(k, jj)) <= half) continue;
        const std::int64_t r = to_int64(round_to_bigint(res.gs.mu(k, jj)));
        for (std::size_t l = 0; l < n; ++l)
          res.transform(l, k) = detail::checked_mul_sub(res.transform(l, k), r, res.transform(l, jj));
        for (std::size_t l = 0; l < jj; ++l) res.gs.mu(k, l) -= Float(static_cast<long long>(r)) * res.gs.mu(jj, l);
        res.gs.mu(k, jj) -= static_cast<long long>(r);
        changed = true;
      }
      if (!changed) break;
      refresh_col(k);
      res.gs = gram_schmidt(res.basis);
      if (pass > 20) throw PrecisionInsufficient("size reduction does not settle at this precision");
    }
    const Float& m = res.gs.mu(k, k - 1);
    if (res.gs.norms2[k] >= (Float(delta) - m * m) * res.gs.norms2[k - 1]) {
      ++k;
    } else {
      res.basis.swap_cols(k, k - 1);
      res.transform.swap_cols(k, k - 1);
      res.gs = gram_schmidt(res.basis);
      ++res.swaps;
      k = k > 1 ? k - 1 : 1;
    }
  }
  for (std::size_t c = 0; c < n; ++c) refresh_col(c);
  res.gs = gram_schmidt(res.basis);
  return res;
}

/// Scalar-matrix front end; the change of basis is available through lll().
inline Matrix<Scalar> lll_reduce(const Matrix<Scalar>& basis, const Scalar& delta = Scalar(Rational(99, 100))) {
  if (all_exact(basis) && determinant(basis) == Scalar(0)) throw NonInvertibleBasis("columns are dependent");
  const LllResult res = lll(to_float(basis), delta.to_double());
  if (all_exact(basis)) {
    Matrix<Rational> exact = basis.map([](const Scalar& s) { return s.rational(); });
    Matrix<Rational> out = multiply(exact, res.transform);
    return out.map([](const Rational& r) { return Scalar(r); });
  }
  return res.basis.map([](const Float& f) { return Scalar(f); });
}

}  // namespace latflow
