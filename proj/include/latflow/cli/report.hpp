#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "latflow/cli/run.hpp"

namespace latflow {

struct ReportOutput {
  std::string summary;
  std::map<std::string, std::string> files;  // plot-data CSVs by file name
};

namespace report_detail {

using json = nlohmann::json;

inline std::string str(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_null()) return "-";
  return v.dump();
}

inline std::string short_num(const json& v) {
  if (!v.is_string()) return str(v);
  const std::string s = v.get<std::string>();
  try {
    std::size_t used = 0;
    const double d = std::stod(s, &used);
    if (used != s.size() || s.find('/') != std::string::npos) return s;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", d);
    return buf;
  } catch (const std::exception&) {
    return s;
  }
}

inline Float value(const json& v) { return evaluate_expression(v.get<std::string>()).to_float(); }

inline std::string trajectory_plot(const json& samples) {
  if (samples.empty()) return "";
  const std::size_t k = samples.front().at("t").size();
  std::vector<std::string> head;
  for (std::size_t i = 0; i < k; ++i) head.push_back("t" + std::to_string(i + 1));
  head.insert(head.end(), {"norm", "delta", "neg_log_delta"});
  io::Csv csv(head);
  for (const auto& s : samples) {
    std::vector<std::string> row;
    Float norm = 0;
    for (const auto& t : s.at("t")) {
      row.push_back(t.get<std::string>());
      norm += value(t);
    }
    const Float d = value(s.at("delta"));
    row.insert(row.end(), {io::num(norm), s.at("delta").get<std::string>(), io::num(Float(-mp::log(d)))});
    csv.row(row);
  }
  return csv.str();
}

inline std::string records_plot(const json& records) {
  io::Csv csv({"qnorm", "dist", "ratio"});
  for (const auto& r : records) {
    const auto q = r.at("qnorm").get<long long>();
    const std::string d = r.at("dist").get<std::string>();
    const Float df = value(r.at("dist"));
    const std::string ratio = q > 1 && df > 0 ? io::num(Float(-mp::log(df) / mp::log(Float(q)))) : "";
    csv.row({std::to_string(q), d, ratio});
  }
  return csv.str();
}

inline std::string fraction_plot(const json& eps, const json& frac) {
  io::Csv csv({"eps", "fraction"});
  for (std::size_t i = 0; i < eps.size(); ++i) csv.row({eps[i].get<std::string>(), frac[i].get<std::string>()});
  return csv.str();
}

}  // namespace report_detail

/// Text summary plus plot-ready CSVs for a finished run directory.
inline ReportOutput report(const std::filesystem::path& run_dir) {
  namespace fs = std::filesystem;
  using report_detail::json;
  const fs::path result_path = run_dir / "result.json";
  if (!fs::exists(result_path)) throw MissingArtifact("no result.json in " + run_dir.string());
  const json doc = json::parse(run_detail::read_file(result_path));
  const std::string kind = doc.at("kind");
  const json& res = doc.at("result");

  ReportOutput out;
  std::ostringstream os;
  os << "run        " << run_dir.filename().string() << "\n"
     << "kind       " << kind << "\n"
     << "config     " << doc.at("config_hash").get<std::string>().substr(0, 12) << "\n"
     << "status     " << doc.at("status").get<std::string>() << "\n";
  if (doc.contains("error")) os << "error      " << doc["error"].get<std::string>() << "\n";
  for (const auto& [k, v] : doc.at("verdicts").items()) os << k << ": " << report_detail::short_num(v) << "\n";

  if (kind == "approx" || kind == "exponent") {
    out.files["records_plot.csv"] = report_detail::records_plot(res.at("records"));
  } else if (kind == "orbit") {
    out.files["trajectory_plot.csv"] = report_detail::trajectory_plot(res.at("samples"));
  } else if (kind == "xval") {
    io::Csv cmp({"quantity", "direct", "orbit"});
    cmp.row({"omega", res.at("omega_direct").at("estimate"), res.at("omega_orbit")});
    cmp.row({"consistent", res.at("singular").at("consistent") ? "1" : "0",
             res.at("divergence").at("consistent") ? "1" : "0"});
    cmp.row({"discrepancy", res.at("discrepancy"), res.at("discrepancy")});
    out.files["comparison.csv"] = cmp.str();
    os << "omega (direct vs orbit)  " << report_detail::short_num(res.at("omega_direct").at("estimate")) << "  "
       << report_detail::short_num(res.at("omega_orbit")) << "  discrepancy "
       << report_detail::short_num(res.at("discrepancy")) << "\n";
  } else if (kind == "nondiv" || kind == "cag") {
    out.files["fraction_plot.csv"] =
        report_detail::fraction_plot(res.at("eps"), kind == "cag" ? res.at("ratio") : res.at("fraction"));
  } else if (kind == "dichotomy") {
    io::Csv table({"index", "origin", "x", "omega", "singular"});
    os << "\n" << "  #  origin    x             omega     singular\n";
    std::size_t i = 0;
    for (const auto& p : res.at("points")) {
      std::string x;
      for (const auto& v : p.at("x")) x += (x.empty() ? "" : " ") + report_detail::short_num(v);
      const std::string omega =
          p.contains("omega") ? (p["omega"].at("infinite") ? "inf" : report_detail::short_num(p["omega"].at("estimate"))) : "";
      const std::string sing = p.contains("singular") ? (p["singular"].at("consistent") ? "yes" : "no") : "";
      table.row({std::to_string(i), p.at("origin"), x, omega, sing});
      char line[160];
      std::snprintf(line, sizeof line, "%3zu  %-8s  %-12s  %-8s  %s\n", i, p.at("origin").get<std::string>().c_str(),
                    x.c_str(), omega.c_str(), sing.c_str());
      os << line;
      ++i;
    }
    out.files["verdicts.csv"] = table.str();
  } else if (kind == "kg-sum") {
    io::Csv csv({"k", "partial_sum"});
    for (const auto& p : res.at("partial_sums")) csv.row({std::to_string(p.at("k").get<long long>()), p.at("sum")});
    out.files["partial_sums_plot.csv"] = csv.str();
  }
  out.summary = os.str();
  return out;
}

/// Writes the plot files of report(run_dir) into dest.
inline ReportOutput write_report(const std::filesystem::path& run_dir, const std::filesystem::path& dest) {
  ReportOutput r = report(run_dir);
  std::filesystem::create_directories(dest);
  for (const auto& [name, content] : r.files) {
    std::ofstream f(dest / name, std::ios::binary);
    f << content;
  }
  std::ofstream(dest / "summary.txt", std::ios::binary) << r.summary;
  return r;
}

}  // namespace latflow
