#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "latflow/correspondence/dictionary.hpp"
#include "latflow/diophantine/approx.hpp"
#include "latflow/diophantine/scans.hpp"
#include "latflow/flows/trajectory.hpp"
#include "latflow/manifolds/family.hpp"
#include "latflow/manifolds/sampling.hpp"

namespace latflow {

struct DichotomyConfig {
  SamplerConfig sampler{};
  std::set<std::string> scans{"omega", "singular"};  // any of omega, singular, di, vwma, gamma
  // omega
  std::int64_t q_max = 10'000;
  std::size_t tail = 5;
  FitMethod method = FitMethod::tail_max;
  // singular
  RateFunction phi = RateFunction::constant(Scalar(1));
  std::vector<Scalar> c_grid{Scalar(Rational(1, 2)), Scalar(Rational(1, 4)), Scalar(Rational(1, 8))};
  std::vector<Float> n_grid;   // empty: powers of 2 up to n_max
  Float n_max = 256;
  ScanOptions scan{};
  // di
  Scalar di_eps = Scalar(Rational(1, 2));
  std::vector<Float> di_t_grid;  // empty: 1, 2, ..., 10
  // vwma
  std::vector<Scalar> vwma_delta{Scalar(Rational(1, 2))};
  std::int64_t vwma_q_max = 1000;
  // gamma
  Scalar gamma_t_min = Scalar(Rational(1, 2));
  Scalar gamma_t_step = Scalar(Rational(1, 2));
  Scalar gamma_t_max = Scalar(20);
  double gamma_window = 0.5;
  TrajectoryOptions trajectory{};
  // special points
  std::vector<std::vector<Scalar>> special_points;
  std::int64_t auto_special_height = 0;  // rational parameters with denominators up to this; 0 disables
  std::size_t auto_special_max = 8;
};

struct PointVerdict {
  std::vector<Scalar> x;
  std::string origin;  // sample, user or rational
  std::optional<ExponentFit> omega;
  std::optional<ScanReport> singular;
  std::optional<ScanReport> di;
  std::optional<VwmaReport> vwma;
  std::optional<ExponentFit> gamma_norm;
  std::optional<Scalar> gamma_ray;
  std::map<std::string, std::string> errors;  // scan -> message, when a scan gave up

  bool special() const { return origin != "sample"; }
};

struct Quantiles {
  std::size_t count = 0;
  Float min = 0, q25 = 0, median = 0, q75 = 0, max = 0;
};

struct DichotomySummary {
  Quantiles omega;                 // finite sampled estimates
  std::size_t omega_infinite = 0;  // sampled points with a rational witness
  std::size_t singular_consistent = 0;
  std::size_t di_consistent = 0;
  std::size_t vwma_consistent = 0;
  Quantiles gamma;
  std::map<std::string, bool> shared;         // every sampled point has the same verdict
  std::map<std::string, bool> special_differ; // some special point departs from the sampled majority
};

struct DichotomyReport {
  std::string family;
  std::uint64_t seed = 0;
  std::vector<PointVerdict> points;  // samples first, then special points
  std::size_t sampled = 0;
  DichotomySummary summary;
};

namespace detail {

inline Quantiles quantiles(std::vector<Float> v) {
  Quantiles q;
  q.count = v.size();
  if (v.empty()) return q;
  std::sort(v.begin(), v.end());
  const auto at = [&](double p) {
    const double pos = p * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return Float(v[lo] + (v[hi] - v[lo]) * Float(pos - static_cast<double>(lo)));
  };
  q.min = v.front();
  q.q25 = at(0.25);
  q.median = at(0.5);
  q.q75 = at(0.75);
  q.max = v.back();
  return q;
}

/// Rationals a/b in [lo, hi] with b <= height, lowest height first.
inline std::vector<Scalar> low_height_rationals(const Scalar& lo, const Scalar& hi, std::int64_t height, std::size_t cap) {
  std::vector<Scalar> out;
  std::set<Rational> seen;
  const Float lf = lo.to_float();
  for (std::int64_t b = 1; b <= height && out.size() < cap; ++b) {
    const auto a0 = static_cast<long long>(mp::ceil(lf * static_cast<long long>(b)).convert_to<long long>());
    for (long long a = a0; out.size() < cap; ++a) {
      const Rational r{BigInt(a), BigInt(b)};
      const Scalar s(r);
      if (hi < s) break;
      if (s < lo || !seen.insert(r).second) continue;
      out.push_back(s);
    }
  }
  return out;
}

inline std::vector<std::vector<Scalar>> auto_special_points(const ManifoldSpec& f, std::int64_t height, std::size_t cap) {
  std::vector<std::vector<Scalar>> axes;
  for (std::size_t i = 0; i < f.d(); ++i) axes.push_back(low_height_rationals(f.lo()[i], f.hi()[i], height, cap));
  std::vector<std::vector<Scalar>> out{{}};
  for (const auto& axis : axes) {
    std::vector<std::vector<Scalar>> next;
    for (const auto& p : out)
      for (const auto& v : axis) {
        if (next.size() >= cap) break;
        auto q = p;
        q.push_back(v);
        next.push_back(std::move(q));
      }
    out = std::move(next);
  }
  return out;
}

inline void run_point_scans(const SystemY& y, const DichotomyConfig& cfg, PointVerdict& pv) {
  const auto guarded = [&](const std::string& name, auto&& body) {
    if (!cfg.scans.count(name)) return;
    try {
      body();
    } catch (const Error& e) {
      pv.errors[name] = e.what();
    }
  };
  guarded("omega", [&] {
    pv.omega = omega_estimate(best_approximations(y, cfg.q_max).records, cfg.tail, cfg.method);
  });
  guarded("singular", [&] {
    const auto grid = cfg.n_grid.empty() ? geometric_grid(Float(2), cfg.n_max) : cfg.n_grid;
    pv.singular = singular_scan(y, cfg.phi, cfg.c_grid, grid, cfg.scan);
  });
  guarded("di", [&] {
    std::vector<Float> ts = cfg.di_t_grid;
    if (ts.empty())
      for (int t = 1; t <= 10; ++t) ts.push_back(Float(t));
    pv.di = di_epsilon_test(y, cfg.di_eps, ts, cfg.scan);
  });
  guarded("vwma", [&] { pv.vwma = vwma_scan(y, cfg.vwma_delta, cfg.vwma_q_max); });
  guarded("gamma", [&] {
    const auto ray = WeightSet::central(y.m(), y.n(), cfg.gamma_t_min, cfg.gamma_t_step, cfg.gamma_t_max);
    pv.gamma_norm = growth_exponent(trajectory(y, ray, cfg.trajectory), cfg.gamma_window);
    pv.gamma_ray = ray_rate_from_norm_rate(Scalar(pv.gamma_norm->estimate), y.m(), y.n());
  });
}

inline PointVerdict make_point(std::vector<Scalar> x, std::string origin) {
  PointVerdict p;
  p.x = std::move(x);
  p.origin = std::move(origin);
  return p;
}

inline std::optional<bool> verdict_of(const PointVerdict& p, const std::string& scan) {
  if (scan == "omega" && p.omega) return p.omega->infinite;
  if (scan == "singular" && p.singular) return p.singular->consistent;
  if (scan == "di" && p.di) return p.di->consistent;
  if (scan == "vwma" && p.vwma) return p.vwma->consistent;
  return std::nullopt;
}

}  // namespace detail

/// Runs the configured scans on seeded samples of F plus special points and
/// compares the verdicts. Scan failures are recorded per point.
inline DichotomyReport dichotomy_experiment(const ManifoldSpec& f, const DichotomyConfig& cfg = {}) {
  static const std::set<std::string> known{"omega", "singular", "di", "vwma", "gamma"};
  for (const auto& s : cfg.scans)
    if (!known.count(s)) throw DomainError("unknown scan '" + s + "'");
  DichotomyReport rep;
  rep.family = f.family();
  rep.seed = cfg.sampler.seed;
  for (const auto& s : sample_box(f.lo(), f.hi(), cfg.sampler)) rep.points.push_back(detail::make_point(s.x, "sample"));
  rep.sampled = rep.points.size();
  for (const auto& x : cfg.special_points) rep.points.push_back(detail::make_point(x, "user"));
  if (cfg.auto_special_height > 0)
    for (const auto& x : detail::auto_special_points(f, cfg.auto_special_height, cfg.auto_special_max))
      rep.points.push_back(detail::make_point(x, "rational"));

  for (auto& p : rep.points) detail::run_point_scans(f(p.x), cfg, p);

  auto& sm = rep.summary;
  std::vector<Float> omegas, gammas;
  for (std::size_t i = 0; i < rep.sampled; ++i) {
    const auto& p = rep.points[i];
    if (p.omega) {
      if (p.omega->infinite)
        ++sm.omega_infinite;
      else
        omegas.push_back(p.omega->estimate);
    }
    if (p.singular && p.singular->consistent) ++sm.singular_consistent;
    if (p.di && p.di->consistent) ++sm.di_consistent;
    if (p.vwma && p.vwma->consistent) ++sm.vwma_consistent;
    if (p.gamma_ray) gammas.push_back(p.gamma_ray->to_float());
  }
  sm.omega = detail::quantiles(omegas);
  sm.gamma = detail::quantiles(gammas);
  for (const auto& scan : cfg.scans) {
    if (scan == "gamma") continue;
    std::size_t yes = 0, total = 0;
    for (std::size_t i = 0; i < rep.sampled; ++i)
      if (const auto v = detail::verdict_of(rep.points[i], scan)) {
        ++total;
        yes += *v ? 1 : 0;
      }
    sm.shared[scan] = total == rep.sampled && (yes == 0 || yes == total);
    const bool majority = 2 * yes > total;
    bool differ = false;
    for (std::size_t i = rep.sampled; i < rep.points.size(); ++i)
      if (const auto v = detail::verdict_of(rep.points[i], scan)) differ = differ || *v != majority;
    sm.special_differ[scan] = differ;
  }
  return rep;
}

}  // namespace latflow
