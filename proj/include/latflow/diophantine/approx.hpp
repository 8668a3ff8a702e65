#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "latflow/diophantine/box.hpp"
#include "latflow/diophantine/sweep.hpp"

namespace latflow {

struct BestApproxOptions {
  std::uint64_t exhaustive_budget = 400'000'000;  // (q, row) evaluations allowed in a sweep
  std::uint64_t node_budget = 50'000'000;         // lattice route, summed over searches
  bool force_lattice = false;
};

struct BestApproxResult {
  std::vector<ApproxRecord> records;
  std::string method;     // "exhaustive" or "lattice"
  bool complete = true;   // false: budget ran out, records are a verified prefix
  std::int64_t q_max = 0;
};

namespace detail {

/// Keeps records whose recomputed distance strictly decreases.
inline std::vector<ApproxRecord> verified_records(const SystemY& y, const std::vector<std::vector<std::int64_t>>& qs) {
  std::vector<ApproxRecord> out;
  for (const auto& q : qs) {
    ApproxRecord r = make_record(y, q);
    if (!out.empty() && !(r.dist < out.back().dist)) continue;
    if (!out.empty() && r.qnorm <= out.back().qnorm) continue;
    out.push_back(std::move(r));
  }
  return out;
}

/// Shell minima over the half box; a shell's first distance within tolerance
/// of its minimum wins ties.
template <int L>
std::vector<std::vector<std::int64_t>> exhaustive_records(const SystemY& y, std::int64_t q_max) {
  using F = FixedFrac<L>;
  const std::size_t m = y.m();
  const F tol = sweep_tolerance<L>(y, q_max);
  struct Best {
    F d = F::max_value();
    std::vector<std::int64_t> q;
  };
  std::vector<Best> shell(static_cast<std::size_t>(q_max) + 1);
  sweep_half_box<L>(y, q_max, [&](const std::vector<std::int64_t>& q, const std::vector<F>& acc, std::int64_t outer) {
    F d = acc[0].dist();
    for (std::size_t i = 1; i < m; ++i) {
      const F di = acc[i].dist();
      if (d < di) d = di;
    }
    const std::int64_t a1 = q[0] < 0 ? -q[0] : q[0];
    Best& b = shell[static_cast<std::size_t>(std::max(a1, outer))];
    if (b.q.empty() || d + tol < b.d) {
      b.d = d;
      b.q = q;
    }
  });

  std::vector<std::vector<std::int64_t>> qs;
  F best = F::max_value();
  for (std::int64_t s = 1; s <= q_max; ++s) {
    const Best& b = shell[static_cast<std::size_t>(s)];
    if (b.q.empty()) continue;
    if (qs.empty() || b.d + tol < best) {
      best = b.d;
      qs.push_back(b.q);
    }
  }
  return qs;
}

}  // namespace detail

/// Lattice route: repeatedly finds the smallest-norm q beating the current
/// record by complete box enumeration with a doubling norm bound.
inline BestApproxResult lattice_best_approximations(const SystemY& y, std::int64_t q_max,
                                                    const BestApproxOptions& opt = {}) {
  BestApproxResult res;
  res.method = "lattice";
  res.q_max = q_max;
  const std::size_t n = y.n();

  // Shell 1 directly.
  std::vector<std::int64_t> q(n, -1);
  std::optional<ApproxRecord> best;
  for (;;) {
    std::int64_t last = 0;
    for (auto v : q)
      if (v != 0) last = v;
    if (last > 0) {
      ApproxRecord r = make_record(y, q);
      if (!best || r.dist < best->dist) best = std::move(r);
    }
    std::size_t i = n;
    while (i > 0 && q[i - 1] == 1) q[--i] = -1;
    if (i == 0) break;
    ++q[i - 1];
  }
  res.records.push_back(*best);

  std::uint64_t nodes = 0;
  std::int64_t s_bound = std::min<std::int64_t>(2, q_max);
  while (res.records.back().dist > Scalar(0) && res.records.back().qnorm < q_max) {
    const Float d = res.records.back().dist.to_float();
    const BoxResult box = box_solve(y, std::vector<Float>(y.m(), d),
                                    std::vector<Float>(n, Float(s_bound) + Float(0.5)), true,
                                    opt.node_budget > nodes ? opt.node_budget - nodes : 0);
    nodes += box.nodes;
    if (box.exhausted) {
      res.complete = false;
      break;
    }
    std::optional<ApproxRecord> next;
    for (const auto& sol : box.solutions) {
      ApproxRecord r = make_record(y, sol.q);
      if (!(r.dist < res.records.back().dist)) continue;
      if (!next || r.qnorm < next->qnorm || (r.qnorm == next->qnorm && r.dist < next->dist)) next = std::move(r);
    }
    if (!next) {
      if (s_bound >= q_max) break;
      s_bound = std::min(q_max, 2 * s_bound);
      continue;
    }
    auto qq = next->q;
    normalize_sign(qq);  // last nonzero coordinate positive, as in the sweep
    res.records.push_back(make_record(y, qq));
  }
  return res;
}

/// Record-setting approximations with |q|_inf <= Q_max.
inline BestApproxResult best_approximations(const SystemY& y, std::int64_t q_max, const BestApproxOptions& opt = {}) {
  if (q_max < 1) throw DomainError("Q_max must be at least 1");
  const std::uint64_t work = detail::half_box_count(y.n(), q_max) * y.m();
  if (!opt.force_lattice && y.n() <= 2 && q_max <= 1'000'000 && work <= opt.exhaustive_budget) {
    BestApproxResult res;
    res.method = "exhaustive";
    res.q_max = q_max;
    std::vector<std::vector<std::int64_t>> qs;
    switch (detail::sweep_words()) {
      case 2: qs = detail::exhaustive_records<2>(y, q_max); break;
      case 4: qs = detail::exhaustive_records<4>(y, q_max); break;
      default: qs = detail::exhaustive_records<8>(y, q_max); break;
    }
    res.records = detail::verified_records(y, qs);
    return res;
  }
  return lattice_best_approximations(y, q_max, opt);
}

/// Tail statistics of log(1/dist) / log|q| over the last `tail` records with |q| > 1.
inline ExponentFit omega_estimate(const std::vector<ApproxRecord>& records, std::size_t tail = 5,
                                  FitMethod method = FitMethod::tail_max) {
  ExponentFit fit;
  fit.method = method;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].dist == Scalar(0)) {
      fit.infinite = true;
      fit.used = {i};
      fit.estimate = fit.tail_max = fit.regression = std::numeric_limits<Float>::infinity();
      return fit;
    }
  }
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < records.size(); ++i)
    if (records[i].qnorm > 1) eligible.push_back(i);
  if (eligible.size() < 3)
    throw TooFewRecords("need at least 3 records with |q| > 1, got " + std::to_string(eligible.size()));
  if (tail < 1) throw DomainError("tail must be positive");
  const std::size_t take = std::min(tail, eligible.size());
  fit.used.assign(eligible.end() - static_cast<std::ptrdiff_t>(take), eligible.end());
  std::vector<Float> xs, ys;
  fit.tail_max = -std::numeric_limits<Float>::infinity();
  for (auto i : fit.used) {
    const Float lq = mp::log(Float(static_cast<long long>(records[i].qnorm)));
    const Float ld = -mp::log(records[i].dist.to_float());
    fit.tail_max = std::max(fit.tail_max, Float(ld / lq));
    xs.push_back(lq);
    ys.push_back(ld);
  }
  fit.regression = take >= 2 ? fit_slope(xs, ys) : fit.tail_max;
  fit.estimate = method == FitMethod::tail_max ? fit.tail_max : fit.regression;
  return fit;
}

}  // namespace latflow
