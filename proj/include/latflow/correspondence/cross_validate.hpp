#pragma once

#include <algorithm>
#include <limits>
#include <optional>
#include <vector>

#include "latflow/correspondence/dictionary.hpp"
#include "latflow/diophantine/scans.hpp"
#include "latflow/flows/trajectory.hpp"

namespace latflow {

struct CorrespondenceConfig {
  std::int64_t q_max = 100'000;
  std::size_t tail = 5;
  FitMethod method = FitMethod::tail_max;
  Scalar t_min = Scalar(Rational(1, 2));
  Scalar t_step = Scalar(Rational(1, 2));
  Scalar t_max = Scalar(25);              // central-ray parameter
  double window = 0.5;
  RateFunction phi = RateFunction::constant(Scalar(1));
  std::vector<Scalar> c_grid{Scalar(Rational(1, 2)), Scalar(Rational(1, 4)), Scalar(Rational(1, 8))};
  double burn_in = 0.5;
  TrajectoryOptions trajectory{};
  ScanOptions scan{};
};

/// A best approximation pushed to the balancing time of the central ray.
struct RecordTransfer {
  ApproxRecord record;
  Float t = 0;         // ray parameter where dist e^{t/m} = |q| e^{-t/n}
  Float delta = 0;     // delta(g_t u_Y Z^k)
  Float bound = 0;     // (m+n) max(dist e^{t/m}, |q| e^{-t/n})
  bool holds = false;
  Float dip_rate = 0;  // -log(delta) / t
};

struct CrossValidation {
  std::size_t m = 0, n = 0;
  std::vector<ApproxRecord> records;
  ExponentFit omega_direct;
  std::vector<TrajectorySample> samples;
  ExponentFit gamma_norm;        // per unit |t|
  Scalar gamma_ray;              // per unit ray parameter
  bool orbit_rational = false;   // the tail witness lies in the contracted subspace exactly
  bool gamma_clamped = false;    // gamma_ray fell outside [0, 1/n) and was clamped
  Float omega_orbit = 0;
  bool omega_orbit_infinite = false;
  Float discrepancy = 0;
  ScanReport singular;
  DivergenceReport divergence;
  bool verdicts_agree = false;
  std::vector<RecordTransfer> transfers;
};

inline Float balancing_time(const ApproxRecord& r, std::size_t m, std::size_t n) {
  const Float mf(static_cast<long long>(m)), nf(static_cast<long long>(n));
  return mp::log(Float(static_cast<long long>(r.qnorm)) / r.dist.to_float()) * mf * nf / (mf + nf);
}

inline RecordTransfer record_transfer(const SystemY& y, const ApproxRecord& r, const TrajectoryOptions& opt = {}) {
  if (r.dist == Scalar(0)) throw DomainError("record has dist 0; no balancing time");
  RecordTransfer tr{r, balancing_time(r, y.m(), y.n()), 0, 0, false, 0};
  const Weights w = central_ray(y.m(), y.n(), Scalar(tr.t));
  const auto s = trajectory(LatticeState::standard(y.m() + y.n()), y, {w}, opt);
  tr.delta = s.front().delta.to_float();
  const Float mf(static_cast<long long>(y.m())), nf(static_cast<long long>(y.n()));
  const Float a = r.dist.to_float() * mp::exp(tr.t / mf);
  const Float b = Float(static_cast<long long>(r.qnorm)) * mp::exp(-tr.t / nf);
  tr.bound = (mf + nf) * std::max(a, b);
  tr.holds = tr.delta <= tr.bound;
  tr.dip_rate = -mp::log(tr.delta) / tr.t;
  return tr;
}

/// Both sides of the dictionary on the same Y: direct exponent vs orbit growth,
/// and the singular scan vs the psi-divergence test.
inline CrossValidation cross_validate(const SystemY& y, const CorrespondenceConfig& cfg = {}) {
  CrossValidation cv;
  cv.m = y.m();
  cv.n = y.n();
  const Scalar ns = detail::integer_scalar(cv.n);

  cv.records = best_approximations(y, cfg.q_max).records;
  cv.omega_direct = omega_estimate(cv.records, cfg.tail, cfg.method);

  const WeightSet ray = WeightSet::central(cv.m, cv.n, cfg.t_min, cfg.t_step, cfg.t_max);
  cv.samples = trajectory(y, ray, cfg.trajectory);
  cv.gamma_norm = growth_exponent(cv.samples, cfg.window);
  cv.gamma_ray = ray_rate_from_norm_rate(Scalar(cv.gamma_norm.estimate), cv.m, cv.n);

  if (y.is_exact() && !cv.samples.empty()) {
    const auto& w = cv.samples.back().witness;
    bool q_nonzero = false, contracted = true;
    for (std::size_t j = 0; j < cv.n; ++j) q_nonzero = q_nonzero || w[cv.m + j] != 0;
    for (std::size_t i = 0; i < cv.m; ++i) {
      Scalar v(static_cast<long long>(w[i]));
      for (std::size_t j = 0; j < cv.n; ++j) v = v + y(i, j) * Scalar(static_cast<long long>(w[cv.m + j]));
      contracted = contracted && v == Scalar(0);
    }
    cv.orbit_rational = q_nonzero && contracted;
  }
  Scalar g = cv.gamma_ray;
  if (g < Scalar(0)) {
    g = Scalar(0);
    cv.gamma_clamped = true;
  }
  if (cv.orbit_rational || !(g < Scalar(1) / ns)) {
    cv.omega_orbit_infinite = true;
    cv.gamma_clamped = cv.gamma_clamped || !cv.orbit_rational;
    cv.omega_orbit = std::numeric_limits<Float>::infinity();
  } else {
    cv.omega_orbit = omega_from_gamma(g, cv.m, cv.n).to_float();
  }
  if (cv.omega_direct.infinite || cv.omega_orbit_infinite)
    cv.discrepancy = cv.omega_direct.infinite == cv.omega_orbit_infinite ? Float(0)
                                                                          : std::numeric_limits<Float>::infinity();
  else
    cv.discrepancy = mp::abs(cv.omega_direct.estimate - cv.omega_orbit);

  const Float nf(static_cast<long long>(cv.n));
  ScanOptions scan = cfg.scan;
  scan.burn_in = cfg.burn_in;
  cv.singular = singular_scan(y, cfg.phi, cfg.c_grid, Float(mp::exp(cfg.t_max.to_float() / nf)), scan);

  std::vector<Float> ts;
  for (const auto& s : cv.samples) ts.push_back(s.t.ray_parameter().to_float());
  const RateFunction psi = psi_from_phi(cfg.phi, cv.m, cv.n, ts);
  cv.divergence = diverges_faster(cv.samples, psi, cfg.c_grid, cfg.burn_in);
  cv.verdicts_agree = cv.singular.consistent == cv.divergence.consistent;

  for (const auto& r : cv.records)
    if (r.dist > Scalar(0)) cv.transfers.push_back(record_transfer(y, r, cfg.trajectory));
  return cv;
}

}  // namespace latflow
