#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "latflow/cli/report.hpp"
#include "latflow/cli/run.hpp"

namespace {

using json = nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitBudget = 3;

// Command-line overrides that map onto config keys.
struct Overrides {
  std::string config_path;
  std::optional<long long> precision, seed;
  std::optional<std::string> out;
  std::map<std::string, std::string> text;    // stored as JSON strings
  std::map<std::string, std::string> raw;     // parsed as JSON when possible
  std::vector<std::string> sets;              // key=value
  std::string manifold_file;
};

json parse_value(const std::string& v) {
  try {
    return json::parse(v);
  } catch (const json::parse_error&) {
    return v;
  }
}

json read_json_file(const std::string& path, const std::string& what) {
  std::ifstream in(path);
  if (!in) throw latflow::ConfigInvalid(what + ": cannot read '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw latflow::ConfigInvalid(what + ": not valid JSON: " + e.what());
  }
}

latflow::ExperimentConfig build_config(const std::string& kind, const Overrides& o) {
  json j = o.config_path.empty() ? json::object() : read_json_file(o.config_path, "--config");
  if (!j.is_object()) throw latflow::ConfigInvalid("config must be a JSON object");
  if (j.contains("kind") && j["kind"] != kind)
    throw latflow::ConfigInvalid("kind: config file is for '" + j["kind"].get<std::string>() + "', not '" + kind + "'");
  j["kind"] = kind;
  if (o.precision) j["precision"] = *o.precision;
  if (o.seed) j["seed"] = *o.seed;
  if (o.out) j["out"] = *o.out;
  for (const auto& [k, v] : o.text) j[k] = v;
  for (const auto& [k, v] : o.raw) j[k] = parse_value(v);
  if (j.contains("scans") && j["scans"].is_string()) {
    json list = json::array();
    std::stringstream ss(j["scans"].get<std::string>());
    for (std::string item; std::getline(ss, item, ',');) list.push_back(item);
    j["scans"] = list;
  }
  if (!o.manifold_file.empty()) j["manifold"] = read_json_file(o.manifold_file, "--manifold");
  for (const auto& s : o.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw latflow::ConfigInvalid("--set: expected key=value, got '" + s + "'");
    j[s.substr(0, eq)] = parse_value(s.substr(eq + 1));
  }
  return latflow::ExperimentConfig::parse(j);
}

bool kind_has(const std::string& kind, const std::string& field) {
  for (const auto& f : latflow::config_detail::schema().at(kind))
    if (f.name == field) return true;
  return false;
}

struct Flag {
  const char* option;
  const char* key;
  const char* help;
  bool as_text;
};

// Shortcut flags; each is attached only to kinds whose schema has the key.
const std::vector<Flag> kFlags{
    {"--y,--Y", "y", "system Y as a matrix literal, rows split by ';'", true},
    {"--q-max", "q_max", "approximation horizon Q_max", false},
    {"--t-max,--tmax", "t_max", "flow horizon", true},
    {"--n-max", "n_max", "scan horizon N_max", true},
    {"--phi", "phi", "rate function, an expression in x", true},
    {"--c-grid", "c_grid", "c grid as a JSON list", false},
    {"--eps", "eps", "Dirichlet shrink factor", true},
    {"--samples", "samples", "sample count", false},
    {"--scan,--scans", "scans", "dichotomy scans, comma separated", false},
    {"--t", "t", "central-ray parameter", true},
    {"--rho", "rho", "nondivergence floor rho", true},
    {"--fn", "fn", "function of x (or x1..xd)", true},
    {"--ball", "ball", "ball as JSON {center, radius}", false},
    {"--mode", "mode", "gamma conversion mode", true},
    {"--values", "values", "gamma inputs as a JSON list", false},
    {"--m", "m", "rows m", false},
    {"--n", "n", "columns n", false},
    {"--s", "s", "affine subspace dimension s", false},
    {"--method", "method", "exponent fit: tail-max or regression", true},
};

int exit_for(const latflow::RunRecord& r) {
  return r.status == "ok" ? kExitOk : kExitBudget;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"latflow: Diophantine approximation and diagonal flows on lattices"};
  app.set_version_flag("--version", latflow::kToolkitVersion);
  app.require_subcommand(1);

  std::map<std::string, Overrides> overrides;
  std::map<std::string, std::map<std::string, std::string>> flag_values;
  for (const auto& kind : latflow::ExperimentConfig::kinds()) {
    auto* sub = app.add_subcommand(kind, "run experiment kind " + kind);
    auto& o = overrides[kind];
    auto& fv = flag_values[kind];
    sub->add_option("--config", o.config_path, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--precision", o.precision, "working precision in bits");
    sub->add_option("--seed", o.seed, "random seed");
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--set", o.sets, "override any config field, key=value");
    if (kind_has(kind, "manifold"))
      sub->add_option("--manifold", o.manifold_file, "manifold JSON file")->check(CLI::ExistingFile);
    for (const auto& f : kFlags)
      if (kind_has(kind, f.key)) sub->add_option(f.option, fv[f.option], f.help);
  }

  std::string report_dir, report_dest;
  auto* rep = app.add_subcommand("report", "summarize a finished run directory");
  rep->add_option("run", report_dir, "run directory")->required();
  rep->add_option("--dest", report_dest, "where to write plot data (default <run>/report)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (rep->parsed()) {
      const std::filesystem::path dest = report_dest.empty() ? std::filesystem::path(report_dir) / "report" : std::filesystem::path(report_dest);
      const auto r = latflow::write_report(report_dir, dest);
      std::cout << r.summary;
      return kExitOk;
    }
    for (auto* sub : app.get_subcommands()) {
      const std::string kind = sub->get_name();
      Overrides o = overrides[kind];
      for (const auto& f : kFlags) {
        const auto it = flag_values[kind].find(f.option);
        const std::string name = std::string(f.option).substr(0, std::string(f.option).find(','));
        if (it == flag_values[kind].end() || sub->count(name) == 0) continue;
        (f.as_text ? o.text : o.raw)[f.key] = it->second;
      }
      const latflow::ExperimentConfig config = build_config(kind, o);
      const latflow::RunRecord r = latflow::run(config);
      std::cout << r.to_json().dump(2) << "\n";
      return exit_for(r);
    }
  } catch (const latflow::ConfigInvalid& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const latflow::ParseError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const latflow::DimensionMismatch& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}
