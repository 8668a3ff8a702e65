#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "latflow/diophantine/approx.hpp"
#include "latflow/diophantine/box.hpp"
#include "latflow/diophantine/sweep.hpp"
#include "latflow/flows/weights.hpp"

namespace latflow {

struct ScanPoint {
  Float x;                             // N, t or |t| depending on the scan
  bool solvable = false;
  bool decided = true;                 // false: node budget ran out
  std::optional<BoxSolution> witness;
};

struct ScanRow {
  Scalar c;
  std::vector<ScanPoint> points;
  std::optional<Float> last_failure;   // largest x that failed or was undecided
  bool tail_clear = false;             // no failure past the burn-in point
};

struct ScanReport {
  std::string kind;
  std::vector<ScanRow> rows;
  Float horizon = 0;
  Float burn_in = 0;  // failures at x <= burn_in do not affect the verdict
  bool consistent = false;
  std::string verdict;
};

struct ScanOptions {
  double burn_in = 0.5;
  std::uint64_t node_budget = kDefaultNodeBudget;
  unsigned max_precision = 512;
};

namespace detail {

inline void finish_row(ScanRow& row, const Float& burn_in) {
  row.tail_clear = true;
  for (const auto& p : row.points) {
    if (p.solvable && p.decided) continue;
    row.last_failure = p.x;
    if (p.x > burn_in) row.tail_clear = false;
  }
}

inline ScanPoint box_point(const SystemY& y, const Float& x, const std::vector<Float>& a, const std::vector<Float>& b,
                           const ScanOptions& opt) {
  BoxResult r;
  try {
    r = box_solve(y, a, b, false, opt.node_budget, opt.max_precision);
  } catch (const NumericOverflow&) {
    return ScanPoint{x, false, false, std::nullopt};  // box too thin for 64-bit coordinates
  }
  ScanPoint p{x, r.solvable, r.solvable || !r.exhausted, std::nullopt};
  if (r.solvable) p.witness = r.solutions.front();
  return p;
}

inline Float dirichlet_exponent(const SystemY& y) {
  return Float(static_cast<long long>(y.n())) / Float(static_cast<long long>(y.m()));
}

}  // namespace detail

/// Geometric grid N_min, N_min r, ... up to N_max inclusive.
inline std::vector<Float> geometric_grid(const Float& n_min, const Float& n_max, const Float& ratio = 2) {
  if (!(n_min > 0) || !(ratio > 1) || n_max < n_min) throw DomainError("bad geometric grid");
  std::vector<Float> out;
  for (Float v = n_min; v <= n_max * (1 + Float(1e-12)); v *= ratio) out.push_back(v);
  return out;
}

/// For each c and N, looks for q with |q| < cN and dist(Yq, Z^m) < c phi(N) / N^{n/m}.
/// Burn-in is measured in log N: failures with log N <= burn_in log N_max are ignored.
inline ScanReport singular_scan(const SystemY& y, const RateFunction& phi, const std::vector<Scalar>& c_grid,
                                const std::vector<Float>& n_grid, const ScanOptions& opt = {}) {
  if (!phi.non_increasing()) throw DomainError("phi must be non-increasing");
  if (c_grid.empty() || n_grid.empty()) throw DomainError("empty scan grid");
  ScanReport rep;
  rep.kind = "singular";
  for (const auto& n : n_grid) rep.horizon = std::max(rep.horizon, n);
  rep.burn_in = opt.burn_in > 0 ? Float(mp::pow(rep.horizon, Float(opt.burn_in))) : Float(0);
  const Float e = detail::dirichlet_exponent(y);
  rep.consistent = true;
  for (const auto& c : c_grid) {
    if (!(c > Scalar(0))) throw DomainError("c must be positive");
    const Float cf = c.to_float();
    ScanRow row{c, {}, std::nullopt, false};
    for (const auto& n : n_grid) {
      const Float a = cf * phi(n) / mp::pow(n, e);
      row.points.push_back(detail::box_point(y, n, std::vector<Float>(y.m(), a),
                                             std::vector<Float>(y.n(), Float(cf * n)), opt));
    }
    detail::finish_row(row, rep.burn_in);
    rep.consistent = rep.consistent && row.tail_clear;
    rep.rows.push_back(std::move(row));
  }
  rep.verdict = rep.consistent ? "consistent-with-phi-singular" : "not-consistent";
  return rep;
}

inline ScanReport singular_scan(const SystemY& y, const RateFunction& phi, const std::vector<Scalar>& c_grid,
                                const Float& n_max, const ScanOptions& opt = {}) {
  return singular_scan(y, phi, c_grid, geometric_grid(Float(2), n_max), opt);
}

/// Solvability of |Yq - p| < eps e^{-t/m}, 0 < |q| < eps e^{t/n} for each t.
/// In DI_eps up to the horizon iff every t after the first success is solvable.
inline ScanReport di_epsilon_test(const SystemY& y, const Scalar& eps, const std::vector<Float>& t_grid,
                                  const ScanOptions& opt = {}) {
  if (!(eps > Scalar(0) && eps < Scalar(1))) throw DomainError("eps must lie in (0, 1)");
  if (t_grid.empty()) throw DomainError("empty t grid");
  ScanReport rep;
  rep.kind = "di-epsilon";
  const Float ef = eps.to_float();
  const Float m(static_cast<long long>(y.m())), n(static_cast<long long>(y.n()));
  ScanRow row{eps, {}, std::nullopt, true};
  for (const auto& t : t_grid) {
    rep.horizon = std::max(rep.horizon, t);
    row.points.push_back(detail::box_point(y, t, std::vector<Float>(y.m(), Float(ef * mp::exp(-t / m))),
                                           std::vector<Float>(y.n(), Float(ef * mp::exp(t / n))), opt));
  }
  std::sort(row.points.begin(), row.points.end(), [](const ScanPoint& a, const ScanPoint& b) { return a.x < b.x; });
  const auto first = std::find_if(row.points.begin(), row.points.end(),
                                  [](const ScanPoint& p) { return p.solvable; });
  rep.consistent = first != row.points.end();
  if (rep.consistent) rep.burn_in = first->x;
  for (const auto& p : row.points) {
    if (p.solvable && p.decided) continue;
    row.last_failure = p.x;
    if (p.x > rep.burn_in) row.tail_clear = false;
  }
  rep.consistent = rep.consistent && row.tail_clear;
  rep.rows.push_back(std::move(row));
  rep.verdict = rep.consistent ? "in-DI_eps-up-to-horizon" : "not-in-DI_eps";
  return rep;
}

/// Per t in T and c: |Y_i q - p_i| < c phi(t) e^{-t_i}, |q_j| < c phi(t) e^{t_{m+j}}.
/// phi is evaluated at the ray parameter of t; burn-in is measured in |t|.
inline ScanReport weighted_singular_scan(const SystemY& y, const RateFunction& phi, const WeightSet& set,
                                         const std::vector<Scalar>& c_grid, const ScanOptions& opt = {}) {
  if (!phi.non_increasing()) throw DomainError("phi must be non-increasing");
  if (c_grid.empty() || set.points().empty()) throw DomainError("empty scan grid");
  ScanReport rep;
  rep.kind = "weighted-singular";
  for (const auto& t : set.points()) {
    if (t.m() != y.m() || t.n() != y.n()) throw DimensionMismatch("weights do not match Y");
    rep.horizon = std::max(rep.horizon, t.norm().to_float());
  }
  rep.burn_in = rep.horizon * Float(opt.burn_in);
  rep.consistent = true;
  for (const auto& c : c_grid) {
    if (!(c > Scalar(0))) throw DomainError("c must be positive");
    ScanRow row{c, {}, std::nullopt, false};
    for (const auto& t : set.points()) {
      const Float s = c.to_float() * phi(t.ray_parameter().to_float());
      std::vector<Float> a(y.m()), b(y.n());
      for (std::size_t i = 0; i < y.m(); ++i) a[i] = s * mp::exp(-t[i].to_float());
      for (std::size_t j = 0; j < y.n(); ++j) b[j] = s * mp::exp(t[y.m() + j].to_float());
      row.points.push_back(detail::box_point(y, t.norm().to_float(), a, b, opt));
    }
    detail::finish_row(row, rep.burn_in);
    rep.consistent = rep.consistent && row.tail_clear;
    rep.rows.push_back(std::move(row));
  }
  rep.verdict = rep.consistent ? "consistent-with-phi-T-singular" : "not-consistent";
  return rep;
}

/// Product of |x_i|.
inline Scalar pi_product(const std::vector<Scalar>& x) {
  Scalar p(1);
  for (const auto& v : x) p = p * (v < Scalar(0) ? Scalar(0) - v : v);
  return p;
}

/// Product of max(|x_i|, 1).
inline Scalar pi_plus(const std::vector<Scalar>& x) {
  Scalar p(1);
  for (const auto& v : x) {
    const Scalar a = v < Scalar(0) ? Scalar(0) - v : v;
    p = p * (a < Scalar(1) ? Scalar(1) : a);
  }
  return p;
}

struct VwmaRow {
  Scalar delta;
  std::vector<std::uint64_t> block_counts;  // block b holds 2^{b-1} < |q| <= 2^b (block 0: |q| = 1)
  std::uint64_t total = 0;
  std::uint64_t top_window = 0;             // solutions with Q/2 < |q| <= Q
  std::vector<ApproxRecord> witnesses;      // largest-|q| solutions, at most 8
};

struct VwmaReport {
  bool degenerate = false;  // some row of Y is integral, so the product vanishes for every q
  std::int64_t horizon = 0; // Q actually swept
  std::vector<VwmaRow> rows;
  bool consistent = false;
  std::string verdict;
};

struct VwmaOptions {
  std::uint64_t budget = 400'000'000;  // (q, row) evaluations
};

namespace detail {

template <int L>
void vwma_sweep(const SystemY& y, std::int64_t q_max, std::vector<VwmaRow>& rows) {
  using F = FixedFrac<L>;
  const std::size_t m = y.m(), n = y.n();
  const Matrix<Float> yf = y.float_entries();
  double min_exp = 1e300;
  for (const auto& r : rows) min_exp = std::min(min_exp, 1 + r.delta.to_double());
  const int blocks = static_cast<int>(std::ceil(std::log2(static_cast<double>(q_max)))) + 1;
  for (auto& r : rows) r.block_counts.assign(static_cast<std::size_t>(blocks), 0);

  sweep_half_box<L>(y, q_max, [&](const std::vector<std::int64_t>& q, const std::vector<F>& acc, std::int64_t) {
    long double prod = 1, plus = 1;
    for (std::size_t i = 0; i < m; ++i) prod *= acc[i].dist().to_long_double();
    for (auto v : q) plus *= static_cast<long double>(std::max<std::int64_t>(v < 0 ? -v : v, 1));
    // Fast rejection; every delta needs prod < plus^{-(1+delta)} <= 1/plus.
    if (prod * plus >= 1.0L + 1e-9L) return;
    if (prod > 0 && std::log(prod) > -min_exp * std::log(plus) + 1e-9L) return;
    // Full-precision check.
    Float fprod = 1;
    for (std::size_t i = 0; i < m; ++i) {
      Float v = 0;
      for (std::size_t j = 0; j < n; ++j) v += yf(i, j) * static_cast<long long>(q[j]);
      fprod *= mp::abs(v - mp::round(v));
    }
    Float fplus = 1;
    for (auto v : q) fplus *= Float(static_cast<long long>(std::max<std::int64_t>(v < 0 ? -v : v, 1)));
    const Float lplus = mp::log(fplus);
    const std::int64_t qn = sup_norm(q);
    const auto block = static_cast<std::size_t>(qn == 1 ? 0 : std::ceil(std::log2(static_cast<double>(qn)) - 1e-12));
    for (auto& r : rows) {
      const bool hit = fprod == 0 || mp::log(fprod) < -(1 + r.delta.to_float()) * lplus;
      if (!hit) continue;
      ++r.total;
      ++r.block_counts[std::min(block, r.block_counts.size() - 1)];
      if (2 * qn > q_max) ++r.top_window;
      r.witnesses.push_back(make_record(y, q));
      std::stable_sort(r.witnesses.begin(), r.witnesses.end(),
                       [](const ApproxRecord& a, const ApproxRecord& b) { return a.qnorm > b.qnorm; });
      if (r.witnesses.size() > 8) r.witnesses.pop_back();
    }
  });
}

}  // namespace detail

/// Counts q in the half box with Pi(Yq - p) < Pi_+(q)^{-(1+delta)}, p nearest.
/// Q is lowered to fit the budget; the report carries the Q used.
inline VwmaReport vwma_scan(const SystemY& y, const std::vector<Scalar>& delta_grid, std::int64_t q_max,
                            const VwmaOptions& opt = {}) {
  if (delta_grid.empty()) throw DomainError("empty delta grid");
  if (q_max < 1) throw DomainError("Q_max must be at least 1");
  for (const auto& d : delta_grid)
    if (!(d > Scalar(0))) throw DomainError("delta must be positive");
  VwmaReport rep;
  for (std::size_t i = 0; i < y.m() && !rep.degenerate; ++i) {
    bool integral = true;
    for (std::size_t j = 0; j < y.n(); ++j) {
      const Scalar& v = y(i, j);
      integral = integral && v.is_exact() && mp::denominator(v.rational()) == 1;
    }
    rep.degenerate = integral;
  }
  if (rep.degenerate) {
    rep.verdict = "degenerate-excluded";
    return rep;
  }
  std::int64_t q = q_max;
  while (q > 1 && detail::half_box_count(y.n(), q) * y.m() > opt.budget) {
    const double root = std::pow(2.0 * static_cast<double>(opt.budget) / static_cast<double>(y.m()) + 1,
                                 1.0 / static_cast<double>(y.n()));
    q = std::min<std::int64_t>(q - 1, static_cast<std::int64_t>((root - 1) / 2));
  }
  rep.horizon = q;
  for (const auto& d : delta_grid) rep.rows.push_back(VwmaRow{d, {}, 0, 0, {}});
  switch (detail::sweep_words()) {
    case 2: detail::vwma_sweep<2>(y, q, rep.rows); break;
    case 4: detail::vwma_sweep<4>(y, q, rep.rows); break;
    default: detail::vwma_sweep<8>(y, q, rep.rows); break;
  }
  for (const auto& r : rep.rows) rep.consistent = rep.consistent || r.top_window > 0;
  rep.verdict = rep.consistent ? "VWMA-consistent" : "not-consistent";
  return rep;
}

struct TransferenceSide {
  std::size_t m = 0, n = 0;
  ExponentFit omega;
  bool omega_available = false;  // false when too few records
  bool vwa = false;
  ScanReport singular;
};

struct TransferenceReport {
  TransferenceSide direct, transposed;
  bool vwa_agree = false;
  bool singular_agree = false;
  std::int64_t q_max = 0;
  Float n_max = 0;
};

struct TransferenceOptions {
  std::int64_t q_max = 10'000;
  std::size_t tail = 5;
  FitMethod method = FitMethod::regression;
  double vwa_margin = 0.75;  // VWA verdict when omega >= (n/m)(1 + margin)
  std::vector<Scalar> c_grid{Scalar(Rational(1, 2)), Scalar(Rational(1, 5))};
  Float n_max = 4096;
  ScanOptions scan{};
};

/// Exponent and singular scans on Y and its transpose at a shared horizon.
inline TransferenceReport transference_check(const SystemY& y, const TransferenceOptions& opt = {}) {
  TransferenceReport rep;
  rep.q_max = opt.q_max;
  rep.n_max = opt.n_max;
  const auto run = [&](const SystemY& s) {
    TransferenceSide side;
    side.m = s.m();
    side.n = s.n();
    const BestApproxResult recs = best_approximations(s, opt.q_max);
    try {
      side.omega = omega_estimate(recs.records, opt.tail, opt.method);
      side.omega_available = true;
      const Float threshold = detail::dirichlet_exponent(s) * (1 + Float(opt.vwa_margin));
      side.vwa = side.omega.infinite || side.omega.estimate >= threshold;
    } catch (const TooFewRecords&) {
      side.omega_available = false;
    }
    side.singular = singular_scan(s, RateFunction::constant(Scalar(1)), opt.c_grid, opt.n_max, opt.scan);
    return side;
  };
  rep.direct = run(y);
  rep.transposed = run(y.transpose());
  rep.vwa_agree = rep.direct.vwa == rep.transposed.vwa;
  rep.singular_agree = rep.direct.singular.consistent == rep.transposed.singular.consistent;
  return rep;
}

struct KgReport {
  std::vector<std::pair<std::int64_t, Float>> partial_sums;  // (K, S_K) at powers of ten and K_max
  Float sum = 0;
  Float tail_exponent = 0;       // s with a(k) ~ k^{-s} near K_max
  std::optional<Float> condensed_exponent;
  std::string diagnostic;        // converges | diverges | inconclusive
};

/// Partial sums of k^{n-1} phi(k)^m with a power-law tail diagnostic.
inline KgReport khintchine_groshev_sum(const RateFunction& phi, std::size_t m, std::size_t n, std::int64_t k_max) {
  if (m == 0 || n == 0) throw DomainError("m and n must be positive");
  if (k_max < 4) throw DomainError("K_max must be at least 4");
  if (!phi.non_increasing()) throw DomainError("phi must be non-increasing");
  const auto term = [&](std::int64_t k) {
    const Float kf(static_cast<long long>(k));
    return Float(mp::pow(kf, static_cast<long>(n - 1)) * mp::pow(phi(kf), static_cast<long>(m)));
  };
  KgReport rep;
  Float sum = 0, comp = 0;
  std::int64_t next_mark = 10;
  for (std::int64_t k = 1; k <= k_max; ++k) {
    const Float a = term(k);
    const Float t = sum + a;
    comp += mp::abs(sum) >= mp::abs(a) ? Float((sum - t) + a) : Float((a - t) + sum);
    sum = t;
    if (k == next_mark || k == k_max) {
      rep.partial_sums.emplace_back(k, sum + comp);
      if (k == next_mark) next_mark *= 10;
    }
  }
  rep.sum = sum + comp;

  const auto exponent = [](const Float& hi, const Float& lo, const Float& ratio) {
    return Float(-mp::log(hi / lo) / mp::log(ratio));
  };
  rep.tail_exponent = exponent(term(k_max), term(k_max / 2), Float(static_cast<long long>(k_max)) /
                                                                 Float(static_cast<long long>(k_max / 2)));
  auto classify = [](const Float& s) -> std::string {
    if (s > Float(1.1)) return "converges";
    if (s < Float(0.9)) return "diverges";
    return "inconclusive";
  };
  rep.diagnostic = classify(rep.tail_exponent);
  if (rep.diagnostic == "inconclusive") {
    // Cauchy condensation: b_j = 2^j a(2^j), compared at j = J and J/2.
    const auto jmax = static_cast<long long>(std::floor(std::log2(static_cast<double>(k_max))));
    const long long jhalf = std::max(1LL, jmax / 2);
    const auto b = [&](long long j) { return Float(mp::ldexp(term(std::int64_t{1} << j), static_cast<int>(j))); };
    if (jmax > jhalf) {
      rep.condensed_exponent = exponent(b(jmax), b(jhalf), Float(jmax) / Float(jhalf));
      rep.diagnostic = classify(*rep.condensed_exponent);
    }
  }
  return rep;
}

}  // namespace latflow
