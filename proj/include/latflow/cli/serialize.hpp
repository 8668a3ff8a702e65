#pragma once

#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "latflow/correspondence/cross_validate.hpp"
#include "latflow/diophantine/approx.hpp"
#include "latflow/diophantine/scans.hpp"
#include "latflow/manifolds/construct.hpp"
#include "latflow/manifolds/dichotomy.hpp"
#include "latflow/manifolds/good.hpp"
#include "latflow/manifolds/nondivergence.hpp"

namespace latflow::io {

using json = nlohmann::json;

inline std::string num(const Float& x) { return to_decimal_string(x); }
inline std::string num(const Scalar& x) { return x.is_exact() ? x.to_string() : to_decimal_string(x.to_float()); }

inline std::string num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline json ints(const std::vector<std::int64_t>& v) { return json(v); }

inline json to_json(const ApproxRecord& r) {
  return {{"q", ints(r.q)}, {"p", ints(r.p)}, {"qnorm", r.qnorm}, {"dist", num(r.dist)}};
}

inline json to_json(const ExponentFit& f) {
  return {{"estimate", num(f.estimate)},   {"method", to_string(f.method)}, {"tail_max", num(f.tail_max)},
          {"regression", num(f.regression)}, {"used", f.used},             {"infinite", f.infinite}};
}

inline json to_json(const ScanReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    json pts = json::array();
    for (const auto& p : row.points) {
      json e{{"x", num(p.x)}, {"solvable", p.solvable}, {"decided", p.decided}};
      if (p.witness) e["witness"] = {{"q", ints(p.witness->q)}, {"p", ints(p.witness->p)}};
      pts.push_back(e);
    }
    rows.push_back({{"c", num(row.c)},
                    {"points", pts},
                    {"last_failure", row.last_failure ? json(num(*row.last_failure)) : json()},
                    {"tail_clear", row.tail_clear}});
  }
  return {{"kind", r.kind},           {"rows", rows},         {"horizon", num(r.horizon)},
          {"burn_in", num(r.burn_in)}, {"consistent", r.consistent}, {"verdict", r.verdict}};
}

inline json to_json(const VwmaReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    json w = json::array();
    for (const auto& rec : row.witnesses) w.push_back(to_json(rec));
    rows.push_back({{"delta", num(row.delta)},
                    {"block_counts", row.block_counts},
                    {"total", row.total},
                    {"top_window", row.top_window},
                    {"witnesses", w}});
  }
  return {{"degenerate", r.degenerate}, {"horizon", r.horizon}, {"rows", rows}, {"consistent", r.consistent},
          {"verdict", r.verdict}};
}

inline json to_json(const TransferenceSide& s) {
  return {{"m", s.m},
          {"n", s.n},
          {"omega", s.omega_available ? to_json(s.omega) : json()},
          {"vwa", s.vwa},
          {"singular", to_json(s.singular)}};
}

inline json to_json(const TransferenceReport& r) {
  return {{"direct", to_json(r.direct)},   {"transposed", to_json(r.transposed)}, {"vwa_agree", r.vwa_agree},
          {"singular_agree", r.singular_agree}, {"q_max", r.q_max},                   {"n_max", num(r.n_max)}};
}

inline json to_json(const KgReport& r) {
  json ps = json::array();
  for (const auto& [k, s] : r.partial_sums) ps.push_back({{"k", k}, {"sum", num(s)}});
  return {{"partial_sums", ps},
          {"sum", num(r.sum)},
          {"tail_exponent", num(r.tail_exponent)},
          {"condensed_exponent", r.condensed_exponent ? json(num(*r.condensed_exponent)) : json()},
          {"diagnostic", r.diagnostic}};
}

inline json to_json(const Weights& w) {
  json t = json::array();
  for (std::size_t i = 0; i < w.k(); ++i) t.push_back(num(w[i]));
  return t;
}

inline json to_json(const TrajectorySample& s) {
  return {{"t", to_json(s.t)}, {"delta", num(s.delta)}, {"witness", ints(s.witness)}, {"certified", s.certified}};
}

inline json to_json(const DivergenceReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows)
    rows.push_back({{"c", num(row.c)},
                    {"last_violation", row.last_violation ? json(num(*row.last_violation)) : json()},
                    {"tail_clear", row.tail_clear}});
  return {{"rows", rows}, {"horizon", num(r.horizon)}, {"burn_in", num(r.burn_in)}, {"consistent", r.consistent},
          {"verdict", r.verdict()}};
}

inline json to_json(const RecordTransfer& t) {
  return {{"record", to_json(t.record)}, {"t", num(t.t)},         {"delta", num(t.delta)},
          {"bound", num(t.bound)},       {"holds", t.holds},      {"dip_rate", num(t.dip_rate)}};
}

inline json to_json(const CrossValidation& cv) {
  json transfers = json::array();
  for (const auto& t : cv.transfers) transfers.push_back(to_json(t));
  return {{"m", cv.m},
          {"n", cv.n},
          {"records", cv.records.size()},
          {"omega_direct", to_json(cv.omega_direct)},
          {"gamma_norm", to_json(cv.gamma_norm)},
          {"gamma_ray", num(cv.gamma_ray)},
          {"orbit_rational", cv.orbit_rational},
          {"gamma_clamped", cv.gamma_clamped},
          {"omega_orbit", num(cv.omega_orbit)},
          {"omega_orbit_infinite", cv.omega_orbit_infinite},
          {"discrepancy", num(cv.discrepancy)},
          {"singular", to_json(cv.singular)},
          {"divergence", to_json(cv.divergence)},
          {"verdicts_agree", cv.verdicts_agree},
          {"transfers", transfers}};
}

inline json to_json(const Quantiles& q) {
  return {{"count", q.count}, {"min", num(q.min)}, {"q25", num(q.q25)},
          {"median", num(q.median)}, {"q75", num(q.q75)}, {"max", num(q.max)}};
}

inline json to_json(const PointVerdict& p) {
  json x = json::array();
  for (const auto& v : p.x) x.push_back(num(v));
  json j{{"x", x}, {"origin", p.origin}};
  if (p.omega) j["omega"] = to_json(*p.omega);
  if (p.singular) j["singular"] = {{"consistent", p.singular->consistent}, {"verdict", p.singular->verdict}};
  if (p.di) j["di"] = {{"consistent", p.di->consistent}, {"verdict", p.di->verdict}};
  if (p.vwma) j["vwma"] = {{"consistent", p.vwma->consistent}, {"verdict", p.vwma->verdict}};
  if (p.gamma_ray) j["gamma_ray"] = num(*p.gamma_ray);
  if (!p.errors.empty()) j["errors"] = p.errors;
  return j;
}

inline json to_json(const DichotomyReport& r) {
  json pts = json::array();
  for (const auto& p : r.points) pts.push_back(to_json(p));
  const auto& s = r.summary;
  return {{"family", r.family},
          {"seed", r.seed},
          {"sampled", r.sampled},
          {"points", pts},
          {"summary",
           {{"omega", to_json(s.omega)},
            {"omega_infinite", s.omega_infinite},
            {"singular_consistent", s.singular_consistent},
            {"di_consistent", s.di_consistent},
            {"vwma_consistent", s.vwma_consistent},
            {"gamma", to_json(s.gamma)},
            {"shared", s.shared},
            {"special_differ", s.special_differ}}}};
}

inline json to_json(const Ball& b) {
  json c = json::array();
  for (double v : b.center) c.push_back(num(v));
  return {{"center", c}, {"radius", num(b.radius)}};
}

inline json doubles(const std::vector<double>& v) {
  json out = json::array();
  for (double x : v) out.push_back(num(x));
  return out;
}

inline json to_json(const GoodFit& f) {
  return {{"ball", to_json(f.ball)},  {"sup", num(f.sup)},      {"eps", doubles(f.eps)}, {"ratio", doubles(f.ratio)},
          {"alpha", num(f.alpha)},    {"c", num(f.c)},          {"r2", num(f.r2)},       {"points", f.points},
          {"seed", f.seed}};
}

inline json to_json(const NondivReport& r) {
  json worst;
  if (r.worst_subspace) {
    const auto& b = r.worst_subspace->basis();
    worst = json::array();
    for (std::size_t j = 0; j < b.cols(); ++j) {
      json col = json::array();
      for (std::size_t i = 0; i < b.rows(); ++i) col.push_back(b(i, j));
      worst.push_back(col);
    }
  }
  return {{"ball_tilde", to_json(r.ball_tilde)},
          {"ball", to_json(r.ball)},
          {"rho", num(r.rho)},
          {"eps", doubles(r.eps)},
          {"fraction", doubles(r.fraction)},
          {"monotone", r.monotone},
          {"bounded", r.bounded},
          {"slope", num(r.slope)},
          {"slope_points", r.slope_points},
          {"min_delta", num(r.min_delta)},
          {"max_delta", num(r.max_delta)},
          {"rho_supported", num(r.rho_supported)},
          {"worst_subspace", worst},
          {"condition_ii", r.condition_ii},
          {"subspaces", r.subspaces},
          {"samples", r.samples},
          {"seed", r.seed}};
}

inline json to_json(const SingularConstruction& c) {
  json ap = json::array();
  for (std::size_t i = 0; i < c.subspace.s(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < c.subspace.a0().size(); ++j) row.push_back(c.subspace.a_prime()(i, j).to_string());
    ap.push_back(row);
  }
  json a0 = json::array();
  for (const auto& v : c.subspace.a0()) a0.push_back(v.to_string());
  json sched = json::array();
  for (const auto& w : c.schedule)
    sched.push_back({{"exponent", w.exponent},
                     {"n", num(w.n)},
                     {"q", ints(w.q)},
                     {"p", ints(w.p)},
                     {"a_error", num(w.a_error)},
                     {"a_condition", w.a_condition},
                     {"q_subspace", ints(w.q_subspace)},
                     {"subspace_bound", num(w.subspace_bound)},
                     {"subspace_condition", w.subspace_condition}});
  return {{"trivial", c.trivial}, {"A_prime", ap},        {"a0", a0},           {"exponents", c.exponents},
          {"schedule", sched},    {"c_min", num(c.c_min)}, {"x_bound", num(c.x_bound)}};
}

/// Minimal CSV builder; fields are written verbatim (no embedded commas by construction).
class Csv {
 public:
  explicit Csv(std::vector<std::string> header) : cols_(header.size()) { row(header); }

  Csv& row(const std::vector<std::string>& cells) {
    if (cells.size() != cols_) throw DimensionMismatch("CSV row has the wrong number of cells");
    for (std::size_t i = 0; i < cells.size(); ++i) os_ << (i ? "," : "") << cells[i];
    os_ << "\n";
    return *this;
  }

  std::string str() const { return os_.str(); }

 private:
  std::size_t cols_;
  std::ostringstream os_;
};

inline std::string join_ints(const std::vector<std::int64_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + std::to_string(v[i]);
  return s;
}

}  // namespace latflow::io
