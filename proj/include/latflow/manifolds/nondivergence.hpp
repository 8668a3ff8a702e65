#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "latflow/diophantine/types.hpp"
#include "latflow/flows/trajectory.hpp"
#include "latflow/lattice/subspace.hpp"
#include "latflow/manifolds/family.hpp"
#include "latflow/manifolds/good.hpp"
#include "latflow/manifolds/sampling.hpp"

namespace latflow {

struct NondivOptions {
  std::size_t samples = 10'000;
  std::uint64_t seed = 1;
  std::int64_t height_cap = 1;          // subspaces checked for condition (ii)
  std::size_t condition_points = 64;    // samples used for sup over B of l_V(h(x))
  TrajectoryOptions trajectory{};
};

struct NondivReport {
  Ball ball_tilde;
  Ball ball;                  // 3^{-(k-1)} ball_tilde
  double rho = 0;
  std::vector<double> eps;
  std::vector<double> fraction;   // share of samples with delta < eps
  bool monotone = false;
  bool bounded = false;           // every fraction lies in [0, 1]
  double slope = 0;               // log-log fit of fraction against eps (nonzero fractions only)
  std::size_t slope_points = 0;
  double min_delta = 0, max_delta = 0;
  double rho_supported = 0;       // min over V of sup_x l_V(h(x))^{1/dim V}
  std::optional<RationalSubspace> worst_subspace;
  bool condition_ii = false;      // rho_supported >= rho
  std::size_t subspaces = 0;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
};

/// rho * 2^{-1}, ..., rho * 2^{-levels}.
inline std::vector<double> nondiv_eps_grid(double rho, int levels = 8) {
  std::vector<double> out;
  for (int i = levels; i >= 1; --i) out.push_back(std::ldexp(rho, -i));
  return out;
}

/// Sublevel fractions of x -> delta(g_t u_{F(x)} g Z^k) over B = 3^{-(k-1)} B~.
inline NondivReport nondivergence_check(const ManifoldSpec& f, const Weights& t, const Matrix<Scalar>& g,
                                        const Ball& ball_tilde, double rho, std::vector<double> eps_grid = {},
                                        const NondivOptions& opt = {}) {
  const std::size_t k = f.m() + f.n();
  if (t.m() != f.m() || t.n() != f.n()) throw DimensionMismatch("weights do not match the family");
  if (ball_tilde.d() != f.d()) throw DimensionMismatch("ball dimension differs from the parameter dimension");
  if (!(rho > 0 && rho <= 1)) throw DomainError("rho must lie in (0, 1]");
  if (opt.samples == 0) throw DomainError("sample count must be positive");
  if (eps_grid.empty()) eps_grid = nondiv_eps_grid(rho);
  std::sort(eps_grid.begin(), eps_grid.end());
  for (double e : eps_grid)
    if (!(e > 0 && e <= rho)) throw DomainError("eps must lie in (0, rho]");

  NondivReport rep;
  rep.ball_tilde = ball_tilde;
  rep.ball = Ball{ball_tilde.center, ball_tilde.radius * std::pow(3.0, -static_cast<double>(k - 1))};
  rep.rho = rho;
  rep.eps = eps_grid;
  rep.samples = opt.samples;
  rep.seed = opt.seed;
  std::vector<Scalar> lo, hi;
  for (std::size_t i = 0; i < f.d(); ++i) {
    lo.push_back(Scalar(Float(rep.ball.lo(i))));
    hi.push_back(Scalar(Float(rep.ball.hi(i))));
  }
  if (!f.contains(lo) || !f.contains(hi)) throw DomainError("shrunken ball is not inside the parameter domain");

  const LatticeState base(g);
  const Matrix<Float> gf = base.float_basis();
  const auto pts = sample_box(lo, hi, SamplerConfig{opt.samples, opt.seed, true});
  std::vector<double> deltas;
  deltas.reserve(pts.size());
  for (const auto& p : pts) {
    const auto s = trajectory(base, f(p.x), {t}, opt.trajectory);
    deltas.push_back(s.front().delta.to_double());
  }
  std::vector<double> sorted = deltas;
  std::sort(sorted.begin(), sorted.end());
  rep.min_delta = sorted.front();
  rep.max_delta = sorted.back();
  std::vector<double> xs, ys;
  for (double e : eps_grid) {
    const auto below = std::lower_bound(sorted.begin(), sorted.end(), e) - sorted.begin();
    const double fr = static_cast<double>(below) / static_cast<double>(sorted.size());
    rep.fraction.push_back(fr);
    if (fr > 0) {
      xs.push_back(std::log(e));
      ys.push_back(std::log(fr));
    }
  }
  rep.monotone = std::is_sorted(rep.fraction.begin(), rep.fraction.end());
  rep.bounded = std::all_of(rep.fraction.begin(), rep.fraction.end(), [](double v) { return v >= 0 && v <= 1; });
  rep.slope_points = xs.size();
  if (xs.size() >= 2) {
    std::vector<Float> xf(xs.begin(), xs.end()), yf(ys.begin(), ys.end());
    rep.slope = fit_slope(xf, yf).convert_to<double>();
  }

  // Condition (ii): sup over B of l_V(h(x)) against rho^{dim V}, sup taken over a subsample.
  SubspaceEnumOptions so;
  so.height_cap = opt.height_cap;
  const auto& list = enumerate_subspaces(k, so);
  rep.subspaces = list.size();
  std::vector<Float> best(list.size(), Float(0));
  const std::size_t stride = std::max<std::size_t>(1, pts.size() / std::max<std::size_t>(1, opt.condition_points));
  for (std::size_t i = 0; i < pts.size(); i += stride) {
    const Matrix<Float> h = orbit_basis(t, f(pts[i].x).at_current_precision(), gf);
    for (std::size_t v = 0; v < list.size(); ++v) {
      const Float cov = subspace_covolume(list[v], h);
      const Float r = list[v].dim() == 1 ? cov : mp::pow(cov, Float(1) / static_cast<unsigned long>(list[v].dim()));
      best[v] = std::max(best[v], r);
    }
  }
  Float worst = std::numeric_limits<Float>::infinity();
  for (std::size_t v = 0; v < list.size(); ++v)
    if (best[v] < worst) {
      worst = best[v];
      rep.worst_subspace = list[v];
    }
  rep.rho_supported = worst.convert_to<double>();
  rep.condition_ii = rep.rho_supported >= rho;
  return rep;
}

}  // namespace latflow
