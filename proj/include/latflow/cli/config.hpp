#pragma once

#include <openssl/evp.h>

#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "latflow/core/errors.hpp"
#include "latflow/core/expr.hpp"
#include "latflow/diophantine/types.hpp"
#include "latflow/manifolds/family.hpp"

namespace latflow {

inline std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error("SHA-256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 15]);
  }
  return out;
}

namespace config_detail {

using json = nlohmann::json;

enum class Type {
  positive_int,  // integer >= 1
  count,         // integer >= 0
  boolean,
  text,
  scalar,           // expression string; numbers are normalized to strings
  positive_scalar,
  scalar_list,      // non-empty
  positive_list,    // non-empty, every entry > 0
  system,           // "a, b; c, d" or {"m", "n", "entries"}
  rate,             // expression in x, or a RateFunction object
  manifold,         // ManifoldSpec object
  ball,             // {"center": [...], "radius": r}
  text_list,        // non-empty
  point_list,       // list of parameter vectors (may be empty)
};

struct Field {
  std::string name;
  Type type;
  json fallback;  // null: required
};

inline json normalize_scalar(const json& v) {
  if (v.is_string()) return v;
  if (v.is_number()) return v.dump();
  return v;
}

inline bool positive(const Scalar& s) { return s > Scalar(0); }

/// Checks one field and rewrites it into canonical form. Returns an error message or "".
inline std::string check(const Field& f, json& v) {
  try {
    switch (f.type) {
      case Type::positive_int:
      case Type::count:
        if (!v.is_number_integer()) return "must be an integer";
        if (f.type == Type::positive_int ? v.get<long long>() < 1 : v.get<long long>() < 0)
          return f.type == Type::positive_int ? "must be positive" : "must be non-negative";
        return "";
      case Type::boolean:
        return v.is_boolean() ? "" : "must be true or false";
      case Type::text:
        return v.is_string() ? "" : "must be a string";
      case Type::scalar:
      case Type::positive_scalar: {
        v = normalize_scalar(v);
        if (!v.is_string()) return "must be a number or an expression string";
        const Scalar s = evaluate_expression(v.get<std::string>());
        if (f.type == Type::positive_scalar && !positive(s)) return "must be positive";
        return "";
      }
      case Type::scalar_list:
      case Type::positive_list: {
        if (!v.is_array()) return "must be a list";
        if (v.empty()) return "grid must not be empty";
        for (auto& e : v) {
          e = normalize_scalar(e);
          if (!e.is_string()) return "entries must be numbers or expression strings";
          const Scalar s = evaluate_expression(e.get<std::string>());
          if (f.type == Type::positive_list && !positive(s)) return "entries must be positive";
        }
        return "";
      }
      case Type::system:
        if (v.is_string()) {
          SystemY::parse(v.get<std::string>());
        } else if (v.is_object()) {
          for (auto& row : v.at("entries"))
            for (auto& e : row) e = normalize_scalar(e);
          SystemY::from_json(v);
        } else {
          return "must be a matrix literal or an {m, n, entries} object";
        }
        return "";
      case Type::rate:
        v = normalize_scalar(v);
        if (v.is_string()) {
          Expr::parse(v.get<std::string>(), {"x"});
        } else if (v.is_object()) {
          RateFunction::from_json(v);
        } else {
          return "must be an expression in x or a rate object";
        }
        return "";
      case Type::manifold:
        if (!v.is_object()) return "must be a manifold object";
        ManifoldSpec::from_json(v);
        return "";
      case Type::ball: {
        if (!v.is_object() || !v.contains("center") || !v.contains("radius")) return "must be {center: [...], radius: r}";
        if (!v["center"].is_array() || v["center"].empty()) return "center must be a non-empty list";
        for (const auto& c : v["center"])
          if (!c.is_number()) return "center entries must be numbers";
        if (!v["radius"].is_number() || !(v["radius"].get<double>() > 0)) return "radius must be a positive number";
        return "";
      }
      case Type::text_list:
        if (!v.is_array() || v.empty()) return "must be a non-empty list of strings";
        for (const auto& e : v)
          if (!e.is_string()) return "entries must be strings";
        return "";
      case Type::point_list:
        if (!v.is_array()) return "must be a list of points";
        for (auto& p : v) {
          if (!p.is_array() || p.empty()) return "each point must be a non-empty list";
          for (auto& e : p) {
            e = normalize_scalar(e);
            if (!e.is_string()) return "point coordinates must be numbers or expression strings";
            evaluate_expression(e.get<std::string>());
          }
        }
        return "";
    }
  } catch (const std::exception& e) {
    return e.what();
  }
  return "";
}

inline const std::map<std::string, std::vector<Field>>& schema() {
  static const std::map<std::string, std::vector<Field>> s = [] {
    const json c_grid = json::array({"1/2", "1/4", "1/8"});
    const std::vector<Field> fit{{"tail", Type::positive_int, 5}, {"method", Type::text, "tail-max"}};
    std::map<std::string, std::vector<Field>> m;
    m["approx"] = {{"y", Type::system, nullptr}, {"q_max", Type::positive_int, 100000}};
    m["exponent"] = {{"y", Type::system, nullptr}, {"q_max", Type::positive_int, 100000}};
    m["exponent"].insert(m["exponent"].end(), fit.begin(), fit.end());
    m["singular"] = {{"y", Type::system, nullptr},           {"phi", Type::rate, "1"},
                     {"c_grid", Type::positive_list, c_grid}, {"n_max", Type::positive_scalar, "1024"},
                     {"n_grid", Type::positive_list, json()}, {"burn_in", Type::scalar, "1/2"}};
    m["di"] = {{"y", Type::system, nullptr},
               {"eps", Type::positive_scalar, "1/2"},
               {"t_min", Type::positive_scalar, "1"},
               {"t_step", Type::positive_scalar, "1"},
               {"t_max", Type::positive_scalar, "10"}};
    m["vwma"] = {{"y", Type::system, nullptr},
                 {"delta_grid", Type::positive_list, json::array({"1/2"})},
                 {"q_max", Type::positive_int, 10000}};
    m["transference"] = {{"y", Type::system, nullptr}, {"q_max", Type::positive_int, 10000}};
    m["kg-sum"] = {{"phi", Type::rate, nullptr},
                   {"m", Type::positive_int, 1},
                   {"n", Type::positive_int, 1},
                   {"k_max", Type::positive_int, 1000000}};
    m["orbit"] = {{"y", Type::system, nullptr},
                  {"t_min", Type::positive_scalar, "1/2"},
                  {"t_step", Type::positive_scalar, "1/2"},
                  {"t_max", Type::positive_scalar, "20"},
                  {"window", Type::positive_scalar, "1/2"}};
    m["gamma"] = {{"mode", Type::text, "gamma_from_omega"},
                  {"m", Type::positive_int, 1},
                  {"n", Type::positive_int, 1},
                  {"values", Type::scalar_list, json()},
                  {"phi", Type::rate, "1"},
                  {"t_min", Type::positive_scalar, "1"},
                  {"t_step", Type::positive_scalar, "1"},
                  {"t_max", Type::positive_scalar, "10"}};
    m["xval"] = {{"y", Type::system, nullptr},
                 {"q_max", Type::positive_int, 100000},
                 {"t_min", Type::positive_scalar, "1/2"},
                 {"t_step", Type::positive_scalar, "1/2"},
                 {"t_max", Type::positive_scalar, "25"},
                 {"window", Type::positive_scalar, "1/2"},
                 {"phi", Type::rate, "1"},
                 {"c_grid", Type::positive_list, c_grid},
                 {"burn_in", Type::scalar, "1/2"}};
    m["xval"].insert(m["xval"].end(), fit.begin(), fit.end());
    m["dichotomy"] = {{"manifold", Type::manifold, nullptr},
                      {"samples", Type::positive_int, 100},
                      {"stratified", Type::boolean, true},
                      {"scans", Type::text_list, json::array({"omega", "singular"})},
                      {"q_max", Type::positive_int, 10000},
                      {"phi", Type::rate, "1"},
                      {"c_grid", Type::positive_list, c_grid},
                      {"n_max", Type::positive_scalar, "256"},
                      {"n_grid", Type::positive_list, json()},
                      {"burn_in", Type::scalar, "1/2"},
                      {"di_eps", Type::positive_scalar, "1/2"},
                      {"vwma_delta", Type::positive_list, json::array({"1/2"})},
                      {"vwma_q_max", Type::positive_int, 1000},
                      {"gamma_t_max", Type::positive_scalar, "20"},
                      {"special_points", Type::point_list, json::array()},
                      {"auto_special_height", Type::count, 0}};
    m["dichotomy"].insert(m["dichotomy"].end(), fit.begin(), fit.end());
    m["nondiv"] = {{"manifold", Type::manifold, nullptr},
                   {"ball", Type::ball, nullptr},
                   {"t", Type::positive_scalar, "5"},
                   {"rho", Type::positive_scalar, "1"},
                   {"eps_grid", Type::positive_list, json()},
                   {"samples", Type::positive_int, 10000},
                   {"height_cap", Type::positive_int, 1}};
    m["cag"] = {{"fn", Type::text, nullptr},
                {"ball", Type::ball, nullptr},
                {"eps_grid", Type::positive_list, json()},
                {"grid_points", Type::positive_int, 65536},
                {"mc_samples", Type::count, 16384}};
    m["construct-singular"] = {{"phi", Type::rate, "1"},
                               {"s", Type::positive_int, 1},
                               {"n", Type::positive_int, 2},
                               {"levels", Type::positive_int, 2},
                               {"c_min", Type::positive_scalar, "1/5"},
                               {"x_bound", Type::positive_scalar, "1"}};
    return m;
  }();
  return s;
}

}  // namespace config_detail

/// A validated experiment description in canonical form: every field present
/// (defaults filled), keys sorted, numbers in grids and scalars as strings.
class ExperimentConfig {
 public:
  using json = nlohmann::json;

  static std::vector<std::string> kinds() {
    std::vector<std::string> out;
    for (const auto& [k, _] : config_detail::schema()) out.push_back(k);
    return out;
  }

  /// Validates and canonicalizes. Throws ConfigInvalid listing every bad field.
  static ExperimentConfig parse(const json& input) {
    if (!input.is_object()) throw ConfigInvalid("config must be a JSON object");
    std::vector<std::string> errors;
    json out = json::object();
    const std::string kind = input.contains("kind") && input["kind"].is_string() ? input["kind"].get<std::string>() : "";
    const auto& sch = config_detail::schema();
    const auto it = sch.find(kind);
    if (it == sch.end()) throw ConfigInvalid("kind: unknown experiment kind '" + kind + "'");
    out["kind"] = kind;

    const auto common = std::vector<config_detail::Field>{{"precision", config_detail::Type::positive_int, 128},
                                                          {"seed", config_detail::Type::count, 1},
                                                          {"out", config_detail::Type::text, "out"}};
    std::vector<config_detail::Field> fields = common;
    fields.insert(fields.end(), it->second.begin(), it->second.end());
    for (const auto& f : fields) {
      json v;
      if (input.contains(f.name) && !input[f.name].is_null()) {
        v = input[f.name];
      } else if (f.fallback.is_null()) {
        if (f.type == config_detail::Type::positive_list || f.name == "values") continue;  // optional grid
        errors.push_back(f.name + ": required for kind '" + kind + "'");
        continue;
      } else {
        v = f.fallback;
      }
      const std::string msg = config_detail::check(f, v);
      if (!msg.empty())
        errors.push_back(f.name + ": " + msg);
      else
        out[f.name] = v;
    }
    for (const auto& [key, _] : input.items()) {
      if (key == "kind") continue;
      bool known = false;
      for (const auto& f : fields) known = known || f.name == key;
      if (!known) errors.push_back(key + ": not a field of kind '" + kind + "'");
    }
    if (out.contains("precision") && out["precision"].get<long long>() < 53)
      errors.push_back("precision: must be at least 53 bits");
    if (out.contains("method") && out["method"] != "tail-max" && out["method"] != "regression")
      errors.push_back("method: must be tail-max or regression");
    if (kind == "gamma" && out.contains("mode")) {
      const auto mode = out["mode"].get<std::string>();
      if (mode != "gamma_from_omega" && mode != "omega_from_gamma" && mode != "threshold_rate" && mode != "psi_from_phi")
        errors.push_back("mode: must be gamma_from_omega, omega_from_gamma, threshold_rate or psi_from_phi");
      else if (mode != "psi_from_phi" && !out.contains("values"))
        errors.push_back("values: required for mode '" + mode + "'");
    }
    if (kind == "dichotomy" && out.contains("scans"))
      for (const auto& s : out["scans"]) {
        const auto v = s.get<std::string>();
        if (v != "omega" && v != "singular" && v != "di" && v != "vwma" && v != "gamma")
          errors.push_back("scans: unknown scan '" + v + "'");
      }
    if (out.contains("t_min") && out.contains("t_max") &&
        evaluate_expression(out["t_max"].get<std::string>()) < evaluate_expression(out["t_min"].get<std::string>()))
      errors.push_back("t_max: must not be below t_min");
    if (!errors.empty()) {
      std::string all;
      for (const auto& e : errors) all += (all.empty() ? "" : "; ") + e;
      throw ConfigInvalid(all);
    }
    ExperimentConfig c;
    c.data_ = std::move(out);
    return c;
  }

  static ExperimentConfig parse_text(const std::string& text) {
    json j;
    try {
      j = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ConfigInvalid(std::string("not valid JSON: ") + e.what());
    }
    return parse(j);
  }

  static ExperimentConfig load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigInvalid("cannot read config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_text(ss.str());
  }

  const json& data() const { return data_; }
  const std::string& kind() const { return data_["kind"].get_ref<const std::string&>(); }
  unsigned precision() const { return data_["precision"].get<unsigned>(); }
  std::uint64_t seed() const { return data_["seed"].get<std::uint64_t>(); }
  std::string out() const { return data_["out"].get<std::string>(); }

  /// Canonical text: sorted keys, two-space indent, trailing newline.
  std::string serialize() const { return data_.dump(2) + "\n"; }

  /// SHA-256 over the canonical config without the output path.
  std::string hash() const {
    json j = data_;
    j.erase("out");
    return sha256_hex(j.dump());
  }

  bool has(const std::string& key) const { return data_.contains(key); }
  std::int64_t integer(const std::string& key) const { return data_.at(key).get<std::int64_t>(); }
  bool boolean(const std::string& key) const { return data_.at(key).get<bool>(); }
  std::string text(const std::string& key) const { return data_.at(key).get<std::string>(); }
  Scalar scalar(const std::string& key) const { return evaluate_expression(text(key)); }

  std::vector<Scalar> scalars(const std::string& key) const {
    std::vector<Scalar> out;
    for (const auto& v : data_.at(key)) out.push_back(evaluate_expression(v.get<std::string>()));
    return out;
  }

  std::vector<Float> floats(const std::string& key) const {
    std::vector<Float> out;
    for (const auto& s : scalars(key)) out.push_back(s.to_float());
    return out;
  }

  std::vector<double> doubles(const std::string& key) const {
    std::vector<double> out;
    for (const auto& s : scalars(key)) out.push_back(s.to_double());
    return out;
  }

  std::vector<std::string> texts(const std::string& key) const { return data_.at(key).get<std::vector<std::string>>(); }

  SystemY system(const std::string& key = "y") const {
    const auto& v = data_.at(key);
    return v.is_string() ? SystemY::parse(v.get<std::string>()) : SystemY::from_json(v);
  }

  RateFunction rate(const std::string& key = "phi") const {
    const auto& v = data_.at(key);
    if (v.is_object()) return RateFunction::from_json(v);
    const Expr e = Expr::parse(v.get<std::string>(), {"x"});
    if (!e.uses_variables()) return RateFunction::constant(e.eval({Scalar(0)}));
    return RateFunction::expression(v.get<std::string>(), true);
  }

  ManifoldSpec manifold(const std::string& key = "manifold") const { return ManifoldSpec::from_json(data_.at(key)); }

  std::vector<std::vector<Scalar>> points(const std::string& key) const {
    std::vector<std::vector<Scalar>> out;
    for (const auto& p : data_.at(key)) {
      std::vector<Scalar> x;
      for (const auto& e : p) x.push_back(evaluate_expression(e.get<std::string>()));
      out.push_back(std::move(x));
    }
    return out;
  }

  friend bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) { return a.data_ == b.data_; }

 private:
  json data_;
};

}  // namespace latflow
