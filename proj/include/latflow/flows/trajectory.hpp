#pragma once

#include <algorithm>
#include <ostream>
#include <string>
#include <vector>

#include "latflow/flows/weights.hpp"
#include "latflow/lattice/shortest_vector.hpp"

namespace latflow {

struct TrajectorySample {
  Weights t;
  Scalar delta;
  std::vector<std::int64_t> witness;  // coefficients in the base basis
  bool certified = false;
  unsigned precision = 0;             // bits used for this sample
};

struct TrajectoryOptions {
  std::uint64_t node_budget = kDefaultNodeBudget;
  unsigned max_precision = 512;
};

/// Basis of g_t u_Y g, with g the basis of `base`.
inline Matrix<Float> orbit_basis(const Weights& t, const SystemY& y, const Matrix<Float>& base) {
  Matrix<Float> u = to_float(unipotent(y));
  for (std::size_t i = 0; i < t.k(); ++i) {
    const Float ti = t[i].to_float();
    const Float f = mp::exp(i < t.m() ? ti : Float(-ti));
    for (std::size_t j = 0; j < t.k(); ++j) u(i, j) *= f;
  }
  return u * base;
}

/// delta(g_t u_Y g Z^k) for each t, ordered by |t|. Precision is raised per
/// sample as needed; budget exhaustion leaves a sample uncertified.
inline std::vector<TrajectorySample> trajectory(const LatticeState& base, const SystemY& y,
                                                const std::vector<Weights>& points,
                                                const TrajectoryOptions& opt = {}) {
  if (base.k() != y.m() + y.n()) throw DimensionMismatch("base lattice dimension must be m + n");
  std::vector<TrajectorySample> out;
  for (const auto& t : points) {
    if (t.m() != y.m() || t.n() != y.n()) throw DimensionMismatch("weights do not match Y");
    out.push_back(with_precision_escalation(
        [&] {
          const SystemY yp = y.at_current_precision();
          const ShortVectorResult sv = shortest_vector(orbit_basis(t, yp, base.float_basis()), opt.node_budget);
          return TrajectorySample{t, sv.length, sv.vector, sv.certified, precision_bits()};
        },
        opt.max_precision));
  }
  std::stable_sort(out.begin(), out.end(), [](const TrajectorySample& a, const TrajectorySample& b) {
    return a.t.norm() < b.t.norm();
  });
  return out;
}

inline std::vector<TrajectorySample> trajectory(const SystemY& y, const WeightSet& set,
                                                const TrajectoryOptions& opt = {}) {
  return trajectory(LatticeState::standard(y.m() + y.n()), y, set.points(), opt);
}

/// Growth statistics of -log delta against |t| over the last `window` fraction of samples.
inline ExponentFit growth_exponent(const std::vector<TrajectorySample>& samples, double window = 0.5) {
  if (!(window > 0 && window <= 1)) throw DomainError("window must lie in (0, 1]");
  std::vector<std::size_t> certified;
  for (std::size_t i = 0; i < samples.size(); ++i)
    if (samples[i].certified) certified.push_back(i);
  if (certified.size() < 10)
    throw TooFewSamples("growth exponent needs at least 10 certified samples, got " + std::to_string(certified.size()));
  const auto take = std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(window * certified.size())));
  ExponentFit fit;
  fit.method = FitMethod::tail_max;
  fit.used.assign(certified.end() - static_cast<std::ptrdiff_t>(std::min(take, certified.size())), certified.end());
  std::vector<Float> xs, ys;
  fit.tail_max = -std::numeric_limits<Float>::infinity();
  for (auto i : fit.used) {
    const Float norm = samples[i].t.norm().to_float();
    const Float v = -mp::log(samples[i].delta.to_float());
    fit.tail_max = std::max(fit.tail_max, Float(v / norm));
    xs.push_back(norm);
    ys.push_back(v);
  }
  fit.regression = fit_slope(xs, ys);
  fit.estimate = fit.tail_max;
  return fit;
}

struct DivergenceRow {
  Scalar c;
  std::optional<Float> last_violation;  // largest |t| with delta >= c psi
  bool tail_clear = false;              // no violation past the burn-in point
};

struct DivergenceReport {
  std::vector<DivergenceRow> rows;
  Float horizon = 0;  // largest |t| sampled
  Float burn_in = 0;  // |t| after which violations count against the verdict
  bool consistent = false;
  std::string verdict() const {
    return consistent ? "consistent-with-divergence-faster" : "not-consistent";
  }
};

/// Evidence that delta(g_t L) < c psi(t) eventually, for each c. psi is
/// evaluated at the ray parameter |t| / 2. Violations before `burn_in` times
/// the horizon are reported but do not affect the verdict.
inline DivergenceReport diverges_faster(const std::vector<TrajectorySample>& samples, const RateFunction& psi,
                                        const std::vector<Scalar>& c_grid, double burn_in = 0.5) {
  if (samples.empty()) throw TooFewSamples("no trajectory samples");
  if (c_grid.empty()) throw DomainError("empty c grid");
  DivergenceReport rep;
  for (const auto& s : samples) rep.horizon = std::max(rep.horizon, s.t.norm().to_float());
  rep.burn_in = rep.horizon * Float(burn_in);
  rep.consistent = true;
  for (const auto& c : c_grid) {
    DivergenceRow row{c, std::nullopt, true};
    for (const auto& s : samples) {
      const Float norm = s.t.norm().to_float();
      if (s.delta.to_float() >= c.to_float() * psi(s.t.ray_parameter().to_float())) {
        row.last_violation = norm;
        if (norm > rep.burn_in) row.tail_clear = false;
      }
    }
    rep.consistent = rep.consistent && row.tail_clear;
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

/// CSV with columns t_1..t_k, delta, certified, witness (';'-separated).
inline void write_trajectory_csv(std::ostream& os, const std::vector<TrajectorySample>& samples) {
  if (samples.empty()) return;
  const std::size_t k = samples.front().t.k();
  for (std::size_t i = 0; i < k; ++i) os << "t_" << (i + 1) << ",";
  os << "delta,certified,witness\n";
  for (const auto& s : samples) {
    for (std::size_t i = 0; i < k; ++i) os << s.t[i].to_string() << ",";
    os << to_decimal_string(s.delta.to_float()) << "," << (s.certified ? "true" : "false") << ",";
    for (std::size_t i = 0; i < s.witness.size(); ++i) os << (i ? ";" : "") << s.witness[i];
    os << "\n";
  }
}

}  // namespace latflow
