#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <vector>

#include "latflow/cli/config.hpp"
#include "latflow/cli/serialize.hpp"

#ifndef LATFLOW_VERSION
#define LATFLOW_VERSION "0.1.0"
#endif

namespace latflow {

inline constexpr const char* kToolkitVersion = LATFLOW_VERSION;

struct RunRecord {
  std::string kind;
  std::string config_hash;
  std::string version = kToolkitVersion;
  double wall_time = 0;         // seconds; kept out of the artifacts
  std::string status;           // ok | partial | budget-exceeded
  nlohmann::json verdicts;
  std::string directory;
  std::vector<std::string> artifacts;
  bool reproduced = false;      // an earlier run left byte-identical artifacts in place

  nlohmann::json to_json() const {
    return {{"kind", kind},         {"config_hash", config_hash}, {"version", version},
            {"wall_time", wall_time}, {"status", status},         {"verdicts", verdicts},
            {"directory", directory}, {"artifacts", artifacts},   {"reproduced", reproduced}};
  }

  static RunRecord from_json(const nlohmann::json& j) {
    RunRecord r;
    r.kind = j.at("kind");
    r.config_hash = j.at("config_hash");
    r.version = j.value("version", "");
    r.wall_time = j.value("wall_time", 0.0);
    r.status = j.at("status");
    r.verdicts = j.value("verdicts", nlohmann::json::object());
    r.directory = j.at("directory");
    r.artifacts = j.value("artifacts", std::vector<std::string>{});
    r.reproduced = j.value("reproduced", false);
    return r;
  }
};

namespace run_detail {

using json = nlohmann::json;

struct Outcome {
  json result = json::object();
  json verdicts = json::object();
  std::map<std::string, std::string> files;  // extra artifacts by file name
  bool partial = false;
};

inline FitMethod method_of(const ExperimentConfig& c) {
  return c.text("method") == "regression" ? FitMethod::regression : FitMethod::tail_max;
}

inline std::vector<Float> t_grid(const ExperimentConfig& c) {
  const Float lo = c.scalar("t_min").to_float(), step = c.scalar("t_step").to_float(), hi = c.scalar("t_max").to_float();
  std::vector<Float> out;
  for (std::size_t i = 0;; ++i) {
    const Float t = lo + step * static_cast<long long>(i);
    if (t > hi * (1 + Float(1e-12))) break;
    out.push_back(t);
  }
  return out;
}

inline std::string records_csv(const std::vector<ApproxRecord>& recs) {
  io::Csv csv({"index", "q", "p", "qnorm", "dist"});
  for (std::size_t i = 0; i < recs.size(); ++i)
    csv.row({std::to_string(i), io::join_ints(recs[i].q), io::join_ints(recs[i].p), std::to_string(recs[i].qnorm),
             io::num(recs[i].dist)});
  return csv.str();
}

inline std::string scan_csv(const ScanReport& r) {
  io::Csv csv({"c", "x", "solvable", "decided", "witness_q"});
  for (const auto& row : r.rows)
    for (const auto& p : row.points)
      csv.row({io::num(row.c), io::num(p.x), p.solvable ? "1" : "0", p.decided ? "1" : "0",
               p.witness ? io::join_ints(p.witness->q) : ""});
  return csv.str();
}

inline std::string trajectory_csv(const std::vector<TrajectorySample>& samples) {
  if (samples.empty()) return "";
  std::vector<std::string> head;
  for (std::size_t i = 0; i < samples.front().t.k(); ++i) head.push_back("t" + std::to_string(i + 1));
  head.insert(head.end(), {"norm", "delta", "certified"});
  io::Csv csv(head);
  for (const auto& s : samples) {
    std::vector<std::string> row;
    for (std::size_t i = 0; i < s.t.k(); ++i) row.push_back(io::num(s.t[i]));
    row.insert(row.end(), {io::num(s.t.norm()), io::num(s.delta), s.certified ? "1" : "0"});
    csv.row(row);
  }
  return csv.str();
}

inline Ball ball_of(const ExperimentConfig& c) {
  const auto& b = c.data().at("ball");
  Ball out;
  for (const auto& v : b.at("center")) out.center.push_back(v.get<double>());
  out.radius = b.at("radius").get<double>();
  return out;
}

inline Outcome approx_outcome(const BestApproxResult& res) {
  Outcome o;
  json recs = json::array();
  for (const auto& r : res.records) recs.push_back(io::to_json(r));
  o.result = {{"method", res.method}, {"complete", res.complete}, {"q_max", res.q_max}, {"records", recs}};
  o.verdicts = {{"records", res.records.size()}, {"complete", res.complete}};
  o.files["records.csv"] = records_csv(res.records);
  o.partial = !res.complete;
  return o;
}

inline Outcome run_approx(const ExperimentConfig& c) {
  return approx_outcome(best_approximations(c.system(), c.integer("q_max")));
}

inline Outcome run_exponent(const ExperimentConfig& c) {
  const auto res = best_approximations(c.system(), c.integer("q_max"));
  Outcome o = approx_outcome(res);
  const ExponentFit fit = omega_estimate(res.records, static_cast<std::size_t>(c.integer("tail")), method_of(c));
  o.result["omega"] = io::to_json(fit);
  o.verdicts = {{"omega", io::num(fit.estimate)}, {"infinite", fit.infinite}, {"complete", res.complete}};
  return o;
}

inline Outcome run_singular(const ExperimentConfig& c) {
  ScanOptions so;
  so.burn_in = c.scalar("burn_in").to_double();
  const SystemY y = c.system();
  const auto grid = c.has("n_grid") ? c.floats("n_grid") : geometric_grid(Float(2), c.scalar("n_max").to_float());
  const ScanReport r = singular_scan(y, c.rate(), c.scalars("c_grid"), grid, so);
  Outcome o;
  o.result = io::to_json(r);
  o.verdicts = {{"singular", r.verdict}};
  o.files["scan.csv"] = scan_csv(r);
  return o;
}

inline Outcome run_di(const ExperimentConfig& c) {
  const ScanReport r = di_epsilon_test(c.system(), c.scalar("eps"), t_grid(c));
  Outcome o;
  o.result = io::to_json(r);
  o.verdicts = {{"di", r.verdict}};
  o.files["scan.csv"] = scan_csv(r);
  return o;
}

inline Outcome run_vwma(const ExperimentConfig& c) {
  const VwmaReport r = vwma_scan(c.system(), c.scalars("delta_grid"), c.integer("q_max"));
  Outcome o;
  o.result = io::to_json(r);
  o.verdicts = {{"vwma", r.verdict}, {"horizon", r.horizon}};
  io::Csv csv({"delta", "block", "count"});
  for (const auto& row : r.rows)
    for (std::size_t b = 0; b < row.block_counts.size(); ++b)
      csv.row({io::num(row.delta), std::to_string(b), std::to_string(row.block_counts[b])});
  o.files["blocks.csv"] = csv.str();
  o.partial = r.horizon > 0 && r.horizon < c.integer("q_max");
  return o;
}

inline Outcome run_transference(const ExperimentConfig& c) {
  TransferenceOptions opt;
  opt.q_max = c.integer("q_max");
  const TransferenceReport r = transference_check(c.system(), opt);
  Outcome o;
  o.result = io::to_json(r);
  o.verdicts = {{"vwa_agree", r.vwa_agree}, {"singular_agree", r.singular_agree}};
  return o;
}

inline Outcome run_kg(const ExperimentConfig& c) {
  const KgReport r = khintchine_groshev_sum(c.rate(), static_cast<std::size_t>(c.integer("m")),
                                            static_cast<std::size_t>(c.integer("n")), c.integer("k_max"));
  Outcome o;
  o.result = io::to_json(r);
  o.verdicts = {{"diagnostic", r.diagnostic}};
  io::Csv csv({"k", "partial_sum"});
  for (const auto& [k, s] : r.partial_sums) csv.row({std::to_string(k), io::num(s)});
  o.files["partial_sums.csv"] = csv.str();
  return o;
}

inline Outcome run_orbit(const ExperimentConfig& c) {
  const SystemY y = c.system();
  const auto ray = WeightSet::central(y.m(), y.n(), c.scalar("t_min"), c.scalar("t_step"), c.scalar("t_max"));
  const auto samples = trajectory(y, ray);
  const ExponentFit g = growth_exponent(samples, c.scalar("window").to_double());
  const Scalar gamma_ray = ray_rate_from_norm_rate(Scalar(g.estimate), y.m(), y.n());
  Outcome o;
  json s = json::array();
  for (const auto& x : samples) s.push_back(io::to_json(x));
  o.result = {{"samples", s}, {"gamma_norm", io::to_json(g)}, {"gamma_ray", io::num(gamma_ray)}};
  o.verdicts = {{"gamma_ray", io::num(gamma_ray)}};
  o.files["trajectory.csv"] = trajectory_csv(samples);
  for (const auto& x : samples) o.partial = o.partial || !x.certified;
  return o;
}

inline Outcome run_gamma(const ExperimentConfig& c) {
  const auto m = static_cast<std::size_t>(c.integer("m")), n = static_cast<std::size_t>(c.integer("n"));
  const std::string mode = c.text("mode");
  Outcome o;
  json rows = json::array();
  if (mode == "psi_from_phi") {
    const auto ts = t_grid(c);
    const RateFunction psi = psi_from_phi(c.rate(), m, n, ts);
    io::Csv csv({"t", "n_of_t", "psi"});
    for (std::size_t i = 0; i < ts.size(); ++i) {
      const Float nt = solve_n_of_t(c.rate(), m, n, ts[i]);
      csv.row({io::num(ts[i]), io::num(nt), io::num(psi.table_y()[i])});
      rows.push_back({{"t", io::num(ts[i])}, {"n_of_t", io::num(nt)}, {"psi", io::num(psi.table_y()[i])}});
    }
    o.files["table.csv"] = csv.str();
  } else {
    io::Csv csv({"input", "output"});
    for (const auto& v : c.scalars("values")) {
      const Scalar out = mode == "gamma_from_omega"   ? gamma_from_omega(v, m, n)
                         : mode == "omega_from_gamma" ? omega_from_gamma(v, m, n)
                                                      : threshold_rate(v, m, n);
      csv.row({io::num(v), io::num(out)});
      rows.push_back({{"input", io::num(v)}, {"output", io::num(out)}});
    }
    o.files["table.csv"] = csv.str();
  }
  o.result = {{"mode", mode}, {"m", m}, {"n", n}, {"rows", rows}};
  o.verdicts = {{"rows", rows.size()}};
  return o;
}

inline Outcome run_xval(const ExperimentConfig& c) {
  CorrespondenceConfig cfg;
  cfg.q_max = c.integer("q_max");
  cfg.tail = static_cast<std::size_t>(c.integer("tail"));
  cfg.method = method_of(c);
  cfg.t_min = c.scalar("t_min");
  cfg.t_step = c.scalar("t_step");
  cfg.t_max = c.scalar("t_max");
  cfg.window = c.scalar("window").to_double();
  cfg.phi = c.rate();
  cfg.c_grid = c.scalars("c_grid");
  cfg.burn_in = c.scalar("burn_in").to_double();
  const CrossValidation cv = cross_validate(c.system(), cfg);
  Outcome o;
  o.result = io::to_json(cv);
  o.verdicts = {{"omega_direct", io::num(cv.omega_direct.estimate)},
                {"omega_orbit", io::num(cv.omega_orbit)},
                {"discrepancy", io::num(cv.discrepancy)},
                {"verdicts_agree", cv.verdicts_agree}};
  io::Csv cmp({"quantity", "direct", "orbit"});
  cmp.row({"omega", io::num(cv.omega_direct.estimate), io::num(cv.omega_orbit)});
  cmp.row({"singular_consistent", cv.singular.consistent ? "1" : "0", cv.divergence.consistent ? "1" : "0"});
  cmp.row({"discrepancy", io::num(cv.discrepancy), io::num(cv.discrepancy)});
  o.files["comparison.csv"] = cmp.str();
  o.files["trajectory.csv"] = trajectory_csv(cv.samples);
  io::Csv tr({"qnorm", "dist", "t", "delta", "bound", "holds"});
  for (const auto& t : cv.transfers)
    tr.row({std::to_string(t.record.qnorm), io::num(t.record.dist), io::num(t.t), io::num(t.delta), io::num(t.bound),
            t.holds ? "1" : "0"});
  o.files["transfers.csv"] = tr.str();
  return o;
}

inline Outcome run_dichotomy(const ExperimentConfig& c) {
  DichotomyConfig cfg;
  cfg.sampler = SamplerConfig{static_cast<std::size_t>(c.integer("samples")), c.seed(), c.boolean("stratified")};
  const auto scans = c.texts("scans");
  cfg.scans = std::set<std::string>(scans.begin(), scans.end());
  cfg.q_max = c.integer("q_max");
  cfg.tail = static_cast<std::size_t>(c.integer("tail"));
  cfg.method = method_of(c);
  cfg.phi = c.rate();
  cfg.c_grid = c.scalars("c_grid");
  cfg.n_max = c.scalar("n_max").to_float();
  if (c.has("n_grid")) cfg.n_grid = c.floats("n_grid");
  cfg.scan.burn_in = c.scalar("burn_in").to_double();
  cfg.di_eps = c.scalar("di_eps");
  cfg.vwma_delta = c.scalars("vwma_delta");
  cfg.vwma_q_max = c.integer("vwma_q_max");
  cfg.gamma_t_max = c.scalar("gamma_t_max");
  cfg.special_points = c.points("special_points");
  cfg.auto_special_height = c.integer("auto_special_height");
  const DichotomyReport r = dichotomy_experiment(c.manifold(), cfg);
  Outcome o;
  o.result = io::to_json(r);
  const auto& s = r.summary;
  o.verdicts = {{"omega_median", s.omega.count ? json(io::num(s.omega.median)) : json()},
                {"singular_consistent", s.singular_consistent},
                {"sampled", r.sampled},
                {"shared", s.shared},
                {"special_differ", s.special_differ}};
  io::Csv csv({"index", "origin", "x", "omega", "omega_infinite", "singular", "di", "vwma", "gamma_ray", "errors"});
  for (std::size_t i = 0; i < r.points.size(); ++i) {
    const auto& p = r.points[i];
    std::string x;
    for (std::size_t j = 0; j < p.x.size(); ++j) x += (j ? " " : "") + io::num(p.x[j]);
    const auto flag = [](const auto& opt) { return opt ? std::string(opt->consistent ? "1" : "0") : std::string(); };
    csv.row({std::to_string(i), p.origin, x, p.omega ? io::num(p.omega->estimate) : "",
             p.omega ? (p.omega->infinite ? "1" : "0") : "", flag(p.singular), flag(p.di), flag(p.vwma),
             p.gamma_ray ? io::num(*p.gamma_ray) : "", std::to_string(p.errors.size())});
    o.partial = o.partial || !p.errors.empty();
  }
  o.files["points.csv"] = csv.str();
  return o;
}

inline Outcome run_nondiv(const ExperimentConfig& c) {
  const ManifoldSpec f = c.manifold();
  NondivOptions opt;
  opt.samples = static_cast<std::size_t>(c.integer("samples"));
  opt.seed = c.seed();
  opt.height_cap = c.integer("height_cap");
  const std::vector<double> eps = c.has("eps_grid") ? c.doubles("eps_grid") : std::vector<double>{};
  const NondivReport r = nondivergence_check(f, central_ray(f.m(), f.n(), c.scalar("t")),
                                             Matrix<Scalar>::identity(f.m() + f.n()), ball_of(c),
                                             c.scalar("rho").to_double(), eps, opt);
  Outcome o;
  o.result = io::to_json(r);
  o.verdicts = {{"monotone", r.monotone}, {"slope", io::num(r.slope)}, {"condition_ii", r.condition_ii}};
  io::Csv csv({"eps", "fraction"});
  for (std::size_t i = 0; i < r.eps.size(); ++i) csv.row({io::num(r.eps[i]), io::num(r.fraction[i])});
  o.files["fractions.csv"] = csv.str();
  return o;
}

inline Outcome run_cag(const ExperimentConfig& c) {
  CagOptions opt;
  opt.grid_points = static_cast<std::size_t>(c.integer("grid_points"));
  opt.mc_samples = static_cast<std::size_t>(c.integer("mc_samples"));
  opt.seed = c.seed();
  const std::vector<double> eps = c.has("eps_grid") ? c.doubles("eps_grid") : std::vector<double>{};
  const GoodFit fit = cag_estimate(c.text("fn"), ball_of(c), eps, opt);
  Outcome o;
  o.result = io::to_json(fit);
  o.verdicts = {{"alpha", io::num(fit.alpha)}, {"c", io::num(fit.c)}};
  io::Csv csv({"eps", "fraction"});
  for (std::size_t i = 0; i < fit.eps.size(); ++i) csv.row({io::num(fit.eps[i]), io::num(fit.ratio[i])});
  o.files["fractions.csv"] = csv.str();
  return o;
}

inline Outcome run_construct(const ExperimentConfig& c) {
  ConstructOptions opt;
  opt.levels = static_cast<std::size_t>(c.integer("levels"));
  opt.c_min = c.scalar("c_min");
  opt.x_bound = c.scalar("x_bound");
  const auto s = static_cast<std::size_t>(c.integer("s")), n = static_cast<std::size_t>(c.integer("n"));
  const SingularConstruction sc = singular_subspace_construct(c.rate(), s, n, opt);
  Outcome o;
  o.result = io::to_json(sc);
  bool ok = true;
  for (const auto& w : sc.schedule) ok = ok && w.a_condition && w.subspace_condition;
  o.verdicts = {{"trivial", sc.trivial}, {"witnesses_hold", ok}, {"levels", sc.schedule.size()}};
  const ManifoldSpec f = ManifoldSpec::affine(sc.subspace, std::vector<Scalar>(s, Scalar(0) - opt.x_bound),
                                              std::vector<Scalar>(s, opt.x_bound));
  o.files["manifold.json"] = f.to_json().dump(2) + "\n";
  return o;
}

inline Outcome dispatch(const ExperimentConfig& c) {
  const std::string& k = c.kind();
  if (k == "approx") return run_approx(c);
  if (k == "exponent") return run_exponent(c);
  if (k == "singular") return run_singular(c);
  if (k == "di") return run_di(c);
  if (k == "vwma") return run_vwma(c);
  if (k == "transference") return run_transference(c);
  if (k == "kg-sum") return run_kg(c);
  if (k == "orbit") return run_orbit(c);
  if (k == "gamma") return run_gamma(c);
  if (k == "xval") return run_xval(c);
  if (k == "dichotomy") return run_dichotomy(c);
  if (k == "nondiv") return run_nondiv(c);
  if (k == "cag") return run_cag(c);
  if (k == "construct-singular") return run_construct(c);
  throw ConfigInvalid("kind: unknown experiment kind '" + k + "'");
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline bool same_contents(const std::filesystem::path& dir, const std::map<std::string, std::string>& files) {
  for (const auto& [name, content] : files) {
    const auto p = dir / name;
    if (!std::filesystem::exists(p) || read_file(p) != content) return false;
  }
  return true;
}

inline std::mutex& ledger_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace run_detail

/// Dispatches the experiment, writes its artifacts under <out>/<kind>-<hash12>/
/// and appends a RunRecord line to <out>/runs.jsonl. Existing artifacts are never
/// overwritten: an identical earlier run is reused, a differing one gets a -rN sibling.
inline RunRecord run(const ExperimentConfig& config) {
  namespace fs = std::filesystem;
  using json = nlohmann::json;
  const auto start = std::chrono::steady_clock::now();
  RunRecord rec;
  rec.kind = config.kind();
  rec.config_hash = config.hash();

  run_detail::Outcome out;
  std::string error;
  {
    PrecisionScope scope(config.precision());
    try {
      out = run_detail::dispatch(config);
      rec.status = out.partial ? "partial" : "ok";
    } catch (const BudgetExceeded& e) {
      error = e.what();
      rec.status = "budget-exceeded";
    }
  }
  rec.verdicts = out.verdicts;

  std::map<std::string, std::string> files = out.files;
  files["config.json"] = config.serialize();
  json result{{"kind", rec.kind}, {"config_hash", rec.config_hash}, {"version", rec.version},
              {"status", rec.status}, {"verdicts", out.verdicts}, {"result", out.result}};
  if (!error.empty()) result["error"] = error;
  files["result.json"] = result.dump(2) + "\n";

  const fs::path root(config.out());
  const std::string base = rec.kind + "-" + rec.config_hash.substr(0, 12);
  fs::path dir = root / base;
  for (int i = 2; fs::exists(dir) && !run_detail::same_contents(dir, files); ++i)
    dir = root / (base + "-r" + std::to_string(i));
  if (fs::exists(dir)) {
    rec.reproduced = true;
  } else {
    fs::create_directories(dir);
    for (const auto& [name, content] : files) {
      std::ofstream f(dir / name, std::ios::binary);
      f << content;
      if (!f) throw Error("cannot write artifact " + (dir / name).string());
    }
  }
  rec.directory = dir.string();
  for (const auto& [name, _] : files) rec.artifacts.push_back((dir / name).string());
  rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  {
    std::lock_guard lock(run_detail::ledger_mutex());
    std::ofstream ledger(root / "runs.jsonl", std::ios::app | std::ios::binary);
    ledger << rec.to_json().dump() << "\n";
    if (!ledger) throw Error("cannot append to the run ledger in " + root.string());
  }
  return rec;
}

}  // namespace latflow
