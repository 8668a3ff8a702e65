#pragma once

#include <cstddef>
#include <vector>

#include "latflow/diophantine/types.hpp"

namespace latflow {

namespace detail {

inline Scalar integer_scalar(std::size_t v) { return Scalar(static_cast<long long>(v)); }

inline void check_dims(std::size_t m, std::size_t n) {
  if (m == 0 || n == 0) throw DomainError("m and n must be positive");
}

}  // namespace detail

/// |t| of the central-ray point with ray parameter t: sum of all coordinates,
/// m (t/m) + n (t/n) = 2t. Every conversion between the two goes through here.
inline Scalar ray_norm_factor(std::size_t m, std::size_t n) {
  detail::check_dims(m, n);
  return Scalar(2);
}

/// Rate per unit ray parameter from a rate per unit |t|.
inline Scalar ray_rate_from_norm_rate(const Scalar& rate, std::size_t m, std::size_t n) {
  return rate * ray_norm_factor(m, n);
}

inline Scalar norm_rate_from_ray_rate(const Scalar& rate, std::size_t m, std::size_t n) {
  return rate / ray_norm_factor(m, n);
}

/// Growth rate of the central-ray orbit, in the ray parameter, of u_Y Z^k with omega(Y) = omega:
/// ((m/n) omega - 1) / (m omega + 1).
inline Scalar gamma_from_omega(const Scalar& omega, std::size_t m, std::size_t n) {
  detail::check_dims(m, n);
  const Scalar ms = detail::integer_scalar(m), ns = detail::integer_scalar(n);
  if (omega < ns / ms) throw DomainError("omega below the Dirichlet exponent n/m");
  return (ms / ns * omega - Scalar(1)) / (ms * omega + Scalar(1));
}

/// Inverse of gamma_from_omega: n (1 + gamma) / (m (1 - n gamma)).
inline Scalar omega_from_gamma(const Scalar& gamma, std::size_t m, std::size_t n) {
  detail::check_dims(m, n);
  const Scalar ms = detail::integer_scalar(m), ns = detail::integer_scalar(n);
  if (gamma < Scalar(0) || !(gamma < Scalar(1) / ns)) throw DomainError("gamma must lie in [0, 1/n)");
  return ns * (Scalar(1) + gamma) / (ms * (Scalar(1) - ns * gamma));
}

/// Decay exponent in the ray parameter t of the orbit threshold for approximation exponent v:
/// (m v - n) / (n (m v + 1)).
inline Scalar threshold_rate(const Scalar& v, std::size_t m, std::size_t n) {
  detail::check_dims(m, n);
  const Scalar ms = detail::integer_scalar(m), ns = detail::integer_scalar(n);
  if (v < ns / ms) throw DomainError("v below the Dirichlet exponent n/m");
  return (ms * v - ns) / (ns * (ms * v + Scalar(1)));
}

/// N(t) solving e^{((m+n)/(mn)) t} = N^{1+n/m} / phi(N), by bisection on log N
/// to relative accuracy 2^{-P/2}.
inline Float solve_n_of_t(const RateFunction& phi, std::size_t m, std::size_t n, const Float& t) {
  detail::check_dims(m, n);
  const Float mf(static_cast<long long>(m)), nf(static_cast<long long>(n));
  const Float target = (mf + nf) / (mf * nf) * t;
  const Float power = 1 + nf / mf;
  // log of the right-hand side as a function of s = log N
  const auto f = [&](const Float& s) { return Float(power * s - mp::log(phi(mp::exp(s)))); };
  // Start from the constant-phi solution and widen until bracketed.
  Float lo = t / nf - 1, hi = t / nf + 1;
  Float flo = f(lo), fhi = f(hi);
  for (int i = 0; i < 200 && !(flo <= target); ++i) {
    const Float w = hi - lo;
    lo -= w;
    const Float v = f(lo);
    if (v > flo) throw SolveFailure("phi is not non-increasing near N = " + to_decimal_string(Float(mp::exp(lo))));
    flo = v;
  }
  for (int i = 0; i < 200 && !(fhi >= target); ++i) {
    const Float w = hi - lo;
    hi += w;
    const Float v = f(hi);
    if (v < fhi) throw SolveFailure("phi is not non-increasing near N = " + to_decimal_string(Float(mp::exp(hi))));
    fhi = v;
  }
  if (!(flo <= target && fhi >= target)) throw SolveFailure("could not bracket N(t) at t = " + to_decimal_string(t));
  const Float tol = half_precision_tolerance();
  while (hi - lo > tol) {
    const Float mid = (lo + hi) / 2;
    const Float v = f(mid);
    if (v < flo || v > fhi) throw SolveFailure("phi is not non-increasing near N = " + to_decimal_string(Float(mp::exp(mid))));
    if (v < target) {
      lo = mid;
      flo = v;
    } else {
      hi = mid;
      fhi = v;
    }
  }
  return mp::exp((lo + hi) / 2);
}

/// psi(t) = e^{-t/n} N(t), tabulated on the given ray parameters.
inline RateFunction psi_from_phi(const RateFunction& phi, std::size_t m, std::size_t n, const std::vector<Float>& t_grid) {
  if (!phi.non_increasing()) throw DomainError("phi must be non-increasing");
  if (t_grid.empty()) throw DomainError("empty t grid");
  const Float nf(static_cast<long long>(n));
  std::vector<Float> ys;
  for (const auto& t : t_grid) ys.push_back(mp::exp(-t / nf) * solve_n_of_t(phi, m, n, t));
  // each N(t) carries up to one bisection tolerance of error in log N
  const Float slack = 1 + 4 * half_precision_tolerance();
  for (std::size_t i = 1; i < ys.size(); ++i)
    if (ys[i] > ys[i - 1] * slack)
      throw SolveFailure("psi increases between t = " + to_decimal_string(t_grid[i - 1]) + " and " +
                         to_decimal_string(t_grid[i]));
  return RateFunction::tabulated(t_grid, ys);
}

}  // namespace latflow
