#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "latflow/core/errors.hpp"
#include "latflow/core/expr.hpp"
#include "latflow/core/random.hpp"

namespace latflow {

/// Sup-norm ball: the box center +- radius on every axis.
struct Ball {
  std::vector<double> center;
  double radius = 1;

  std::size_t d() const { return center.size(); }
  double lo(std::size_t i) const { return center[i] - radius; }
  double hi(std::size_t i) const { return center[i] + radius; }
};

struct CagOptions {
  std::size_t grid_points = 1 << 16;  // total midpoint-grid size, split evenly over the axes
  std::size_t mc_samples = 1 << 14;
  std::uint64_t seed = 1;
  double flat_tolerance = 1e-12;
};

/// Empirical (C, alpha) fit of lambda{|f| < eps} / lambda(B) ~ C (eps / sup|f|)^alpha.
struct GoodFit {
  Ball ball;
  double sup = 0;
  std::vector<double> eps;
  std::vector<double> ratio;  // sublevel measure fraction per eps
  double alpha = 0;
  double c = 0;               // max over the grid of ratio / (eps / sup)^alpha
  double r2 = 0;
  std::size_t points = 0;
  std::uint64_t seed = 0;
};

namespace detail {

inline double r_squared(const std::vector<double>& x, const std::vector<double>& y, double slope, double intercept) {
  double mean = 0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  double ss_res = 0, ss_tot = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (intercept + slope * x[i]);
    ss_res += r * r;
    ss_tot += (y[i] - mean) * (y[i] - mean);
  }
  return ss_tot > 0 ? 1 - ss_res / ss_tot : 1;
}

/// Midpoint grid plus seeded uniform points in the ball.
inline std::vector<std::vector<double>> ball_points(const Ball& b, const CagOptions& opt) {
  const std::size_t d = b.d();
  std::size_t per_axis = static_cast<std::size_t>(std::floor(std::pow(static_cast<double>(opt.grid_points), 1.0 / static_cast<double>(d))));
  per_axis = std::max<std::size_t>(per_axis, 1);
  std::size_t cells = 1;
  for (std::size_t i = 0; i < d; ++i) cells *= per_axis;
  std::vector<std::vector<double>> out;
  out.reserve(cells + opt.mc_samples);
  for (std::size_t c = 0; c < cells; ++c) {
    std::vector<double> x(d);
    std::size_t r = c;
    for (std::size_t i = 0; i < d; ++i) {
      x[i] = b.lo(i) + 2 * b.radius * (static_cast<double>(r % per_axis) + 0.5) / static_cast<double>(per_axis);
      r /= per_axis;
    }
    out.push_back(std::move(x));
  }
  CounterRng rng(opt.seed, 2);
  for (std::size_t s = 0; s < opt.mc_samples; ++s) {
    std::vector<double> x(d);
    for (std::size_t i = 0; i < d; ++i) x[i] = rng.uniform(b.lo(i), b.hi(i));
    out.push_back(std::move(x));
  }
  return out;
}

}  // namespace detail

/// Default eps grid: sup * 2^{-1}, ..., sup * 2^{-levels}.
inline std::vector<double> default_eps_grid(double sup, int levels = 12) {
  std::vector<double> out;
  for (int i = 1; i <= levels; ++i) out.push_back(std::ldexp(sup, -i));
  return out;
}

/// An empty eps grid means default_eps_grid(sup).
inline GoodFit cag_estimate(const std::function<double(const std::vector<double>&)>& f, const Ball& ball,
                            std::vector<double> eps_grid = {}, const CagOptions& opt = {}) {
  if (ball.d() == 0) throw DomainError("ball dimension must be positive");
  if (!(ball.radius > 0)) throw DomainError("ball radius must be positive");
  const auto pts = detail::ball_points(ball, opt);
  std::vector<double> vals;
  vals.reserve(pts.size());
  double sup = 0;
  for (const auto& x : pts) {
    const double v = std::fabs(f(x));
    if (!std::isfinite(v)) throw DomainError("f is not finite on the ball");
    vals.push_back(v);
    sup = std::max(sup, v);
  }
  if (sup < opt.flat_tolerance) throw FlatFunction("sup |f| on the ball is below " + std::to_string(opt.flat_tolerance));
  if (eps_grid.empty()) eps_grid = default_eps_grid(sup);
  std::sort(eps_grid.begin(), eps_grid.end());
  for (double e : eps_grid)
    if (!(e > 0 && e < sup)) throw DomainError("eps must lie in (0, sup |f|)");

  std::vector<double> sorted = vals;
  std::sort(sorted.begin(), sorted.end());
  GoodFit fit;
  fit.ball = ball;
  fit.sup = sup;
  fit.eps = eps_grid;
  fit.points = pts.size();
  fit.seed = opt.seed;
  std::vector<double> xs, ys;
  for (double e : eps_grid) {
    const auto below = std::lower_bound(sorted.begin(), sorted.end(), e) - sorted.begin();
    const double r = static_cast<double>(below) / static_cast<double>(sorted.size());
    fit.ratio.push_back(r);
    if (r > 0) {
      xs.push_back(std::log(e / sup));
      ys.push_back(std::log(r));
    }
  }
  if (xs.size() < 2) throw TooFewSamples("fewer than two eps values with a nonempty sublevel set");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(xs.size());
  my /= static_cast<double>(xs.size());
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  if (!(sxx > 0)) throw TooFewSamples("eps grid has a single distinct value");
  fit.alpha = sxy / sxx;
  fit.r2 = detail::r_squared(xs, ys, fit.alpha, my - fit.alpha * mx);
  for (std::size_t i = 0; i < eps_grid.size(); ++i)
    if (fit.ratio[i] > 0) fit.c = std::max(fit.c, fit.ratio[i] / std::pow(eps_grid[i] / sup, fit.alpha));
  return fit;
}

/// f given as an expression in x (d = 1) or x1..xd.
inline GoodFit cag_estimate(const std::string& expr, const Ball& ball, std::vector<double> eps_grid = {},
                            const CagOptions& opt = {}) {
  std::vector<std::string> names;
  for (std::size_t i = 1; i <= ball.d(); ++i) names.push_back("x" + std::to_string(i));
  const bool one = ball.d() == 1;
  if (one) names.push_back("x");
  const Expr e = Expr::parse(expr, names);
  return cag_estimate(
      [&](const std::vector<double>& x) {
        if (!one) return e.eval_double(x);
        return e.eval_double({x[0], x[0]});
      },
      ball, std::move(eps_grid), opt);
}

}  // namespace latflow
