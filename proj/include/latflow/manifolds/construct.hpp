#pragma once

#include <cstdint>
#include <vector>

#include "latflow/diophantine/types.hpp"
#include "latflow/manifolds/family.hpp"

namespace latflow {

struct ConstructOptions {
  std::size_t levels = 2;                  // witness levels in the schedule
  Scalar c_min = Scalar(Rational(1, 5));   // smallest c the schedule must serve
  Scalar x_bound = Scalar(1);              // |x_i| <= x_bound on the sampled part of the subspace
};

/// One scale of the schedule: q = 10^{a_l} e_1 for A and the induced q~ = (-p', q) for Y(x).
struct WitnessLevel {
  int exponent = 0;                     // a_l
  Float n = 0;                          // scheduled N
  std::vector<std::int64_t> q;          // A-system, length n - s
  std::vector<std::int64_t> p;          // nearest integers to A q, length s + 1
  Scalar a_error;                       // |A q - p|_inf, exact
  bool a_condition = false;             // |q| < c N and |Aq - p| < c phi(N) / N^{(n-s)/(s+1)} at c = c_min
  std::vector<std::int64_t> q_subspace; // witness for every Y(x), length n
  Float subspace_bound = 0;             // (1 + s x_bound) |A q - p|, bounds dist(Y(x) q~, Z)
  bool subspace_condition = false;      // |q~| < c N and subspace_bound < c phi(N) / N^n at c = c_min
};

struct SingularConstruction {
  bool trivial = false;  // the rate is implied by Dirichlet's theorem; A = 0
  AffineSubspace subspace;
  std::vector<int> exponents;  // a_1 < a_2 < ... (one more than the levels)
  std::vector<WitnessLevel> schedule;
  Scalar c_min;
  Scalar x_bound;

  std::vector<Float> schedule_n() const {
    std::vector<Float> out;
    for (const auto& w : schedule) out.push_back(w.n);
    return out;
  }
};

namespace detail {

inline Scalar pow10_scalar(int e) {
  return Scalar(Rational(mp::pow(BigInt(10), static_cast<unsigned>(e)), BigInt(1)));
}

/// Digit d_{ijl} in 1..9 for entry (i, j) at level l; level 0 (exponent 0)
/// would only add an integer, so entries stay in (0, 1).
inline int construct_digit(std::size_t i, std::size_t j, std::size_t l) {
  if (l == 0) return 0;
  return 1 + static_cast<int>((3 * i + 5 * j + 7 * l + 2 * i * j) % 9);
}

}  // namespace detail

/// A in M_{s+1, n-s} with entries sum_l d_l 10^{-a_l} (exact truncation after
/// levels + 1 terms), a_{l+1} chosen so that q = 10^{a_l} e_1 witnesses the
/// phi-singular system for every point of x -> (x, x A' + a0) at N_l.
inline SingularConstruction singular_subspace_construct(const RateFunction& target_rate, std::size_t s, std::size_t n,
                                                        const ConstructOptions& opt = {}) {
  if (s < 1 || s >= n) throw DomainError("need 1 <= s < n");
  if (opt.levels < 1) throw DomainError("need at least one witness level");
  if (!(opt.c_min > Scalar(0)) || !(opt.x_bound > Scalar(0))) throw DomainError("c_min and x_bound must be positive");
  if (!target_rate.non_increasing()) throw DomainError("target rate must be non-increasing");
  const std::size_t cols = n - s;
  const Float cmin = opt.c_min.to_float();
  const Float nf(static_cast<long long>(n));
  const Float spread = 1 + Float(static_cast<long long>(s)) * opt.x_bound.to_float();

  // Dirichlet already gives q with |q| < cN/2... dist <= (cN/2)^{-n}; rates at least
  // 2^n c^{-n-1} are then met by every A.
  const Float floor_rate = mp::pow(Float(2), nf) / mp::pow(cmin, nf + 1);
  if (target_rate(Float(1e30)) >= floor_rate) {
    Matrix<Scalar> ap(s, cols, Scalar(0));
    return SingularConstruction{true, AffineSubspace(ap, std::vector<Scalar>(cols, Scalar(0))), {}, {}, opt.c_min,
                                opt.x_bound};
  }

  // Exponents: a_1 = 0, then the least a_{l+1} >= (l+1) a_l meeting the level-l bound
  // with the worst-case N_l = 1.01 * 10^{a_l} / c_min (entries lie in (0, 1), so |p'| <= q).
  std::vector<int> a{0};
  for (std::size_t l = 0; l < opt.levels; ++l) {
    const int al = a.back();
    const Float n_bar = Float(1.01) * mp::pow(Float(10), al) / cmin;
    const Float need = cmin * target_rate(n_bar) / mp::pow(n_bar, nf);  // spread * 9.5 * 10^{a_l - a} < need
    const Float digits = mp::log10(spread * Float(9.5) / need) + al;
    int next = std::max(al + 1, static_cast<int>(al * static_cast<int>(l + 2)));
    next = std::max(next, static_cast<int>(mp::floor(digits).convert_to<long long>()) + 1);
    if (l + 1 < opt.levels && next > 18)
      throw UnachievableRate("witness level " + std::to_string(l + 2) + " needs q = 10^" + std::to_string(next) +
                             ", beyond 64-bit range");
    a.push_back(next);
  }

  Matrix<Scalar> am(s + 1, cols, Scalar(0));
  for (std::size_t i = 0; i <= s; ++i)
    for (std::size_t j = 0; j < cols; ++j) {
      Scalar v(0);
      for (std::size_t l = 0; l < a.size(); ++l)
        v = v + Scalar(static_cast<long long>(detail::construct_digit(i, j, l))) / detail::pow10_scalar(a[l]);
      am(i, j) = v;
    }
  Matrix<Scalar> ap(s, cols);
  std::vector<Scalar> a0(cols);
  for (std::size_t j = 0; j < cols; ++j) a0[j] = am(0, j);
  for (std::size_t i = 0; i < s; ++i)
    for (std::size_t j = 0; j < cols; ++j) ap(i, j) = am(i + 1, j);

  SingularConstruction out{false, AffineSubspace(ap, a0), a, {}, opt.c_min, opt.x_bound};
  const Float a_exp = Float(static_cast<long long>(cols)) / Float(static_cast<long long>(s + 1));
  for (std::size_t l = 0; l < opt.levels; ++l) {
    WitnessLevel w;
    w.exponent = a[l];
    const BigInt qb = mp::pow(BigInt(10), static_cast<unsigned>(a[l]));
    w.q.assign(cols, 0);
    w.q[0] = qb.convert_to<long long>();
    Rational worst = 0;
    for (std::size_t i = 0; i <= s; ++i) {
      const Rational v = am(i, 0).rational() * Rational(qb);
      const BigInt r = round_to_bigint(Float(v));  // exact enough: v is far from half-integers
      const Rational err = abs(v - Rational(r));
      if (err > Rational(1, 2)) throw NumericOverflow("rounding failed in witness construction");
      worst = std::max(worst, err);
      w.p.push_back(r.convert_to<long long>());
    }
    w.a_error = Scalar(worst);
    w.q_subspace.assign(n, 0);
    std::int64_t sup = w.q[0];
    for (std::size_t i = 0; i < s; ++i) {
      w.q_subspace[i] = -w.p[i + 1];
      sup = std::max<std::int64_t>(sup, w.p[i + 1] < 0 ? -w.p[i + 1] : w.p[i + 1]);
    }
    w.q_subspace[s] = w.q[0];
    w.n = Float(static_cast<long long>(sup)) * Float(1.01) / cmin;
    const Float rate = cmin * target_rate(w.n);
    w.a_condition = Float(static_cast<long long>(w.q[0])) < cmin * w.n &&
                    w.a_error.to_float() < rate / mp::pow(w.n, a_exp);
    w.subspace_bound = spread * w.a_error.to_float();
    w.subspace_condition = Float(static_cast<long long>(sup)) < cmin * w.n && w.subspace_bound < rate / mp::pow(w.n, nf);
    out.schedule.push_back(std::move(w));
  }
  return out;
}

}  // namespace latflow
