#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "latflow/cli/config.hpp"
#include "latflow/cli/report.hpp"
#include "latflow/cli/run.hpp"

using namespace latflow;
using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("latflow-test-" + name + "-" + std::to_string(::getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string l; std::getline(ss, l);) out.push_back(l);
  return out;
}

ExperimentConfig approx_config(const fs::path& out, long long q_max = 200) {
  return ExperimentConfig::parse({{"kind", "approx"}, {"y", "(1+sqrt(5))/2"}, {"q_max", q_max}, {"out", out.string()}});
}

}  // namespace

TEST(Config, DefaultsAreFilledAndCanonical) {
  const auto c = ExperimentConfig::parse({{"kind", "singular"}, {"y", "sqrt(2)"}, {"c_grid", {0.5, "1/4"}}});
  EXPECT_EQ(c.precision(), 128u);
  EXPECT_EQ(c.seed(), 1u);
  EXPECT_EQ(c.text("phi"), "1");
  EXPECT_EQ(c.data().at("c_grid"), json({"0.5", "1/4"}));
  EXPECT_EQ(c.scalars("c_grid")[1], Scalar(Rational(1, 4)));
  EXPECT_FALSE(c.has("n_grid"));
}

TEST(Config, RoundTripsThroughSerialization) {
  for (const json& in : {json{{"kind", "approx"}, {"y", "sqrt(2); sqrt(3)"}},
                         json{{"kind", "dichotomy"}, {"manifold", ManifoldSpec::mahler(2, {Scalar(1)}, {Scalar(2)}).to_json()}},
                         json{{"kind", "gamma"}, {"values", {3, "7/2"}}, {"m", 2}},
                         json{{"kind", "cag"}, {"fn", "x^2"}, {"ball", {{"center", {0}}, {"radius", 1}}}}}) {
    const auto c = ExperimentConfig::parse(in);
    const auto back = ExperimentConfig::parse_text(c.serialize());
    EXPECT_EQ(back, c);
    EXPECT_EQ(back.serialize(), c.serialize());
    EXPECT_EQ(back.hash(), c.hash());
  }
}

TEST(Config, HashIsDeterministicAndIgnoresOutput) {
  const auto a = approx_config("a"), b = approx_config("b"), c = approx_config("a", 201);
  EXPECT_EQ(a.hash(), b.hash());
  EXPECT_NE(a.hash(), c.hash());
  EXPECT_EQ(a.hash().size(), 64u);
  // key order in the input does not matter
  const auto d = ExperimentConfig::parse_text(R"({"q_max": 200, "out": "a", "y": "(1+sqrt(5))/2", "kind": "approx"})");
  EXPECT_EQ(d.hash(), a.hash());
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Config, RejectsInvalidInput) {
  EXPECT_THROW(ExperimentConfig::parse({{"kind", "singular"}, {"y", "sqrt(2)"}, {"c_grid", json::array()}}), ConfigInvalid);
  EXPECT_THROW(ExperimentConfig::parse({{"kind", "approx"}, {"y", "sqrt(2)"}, {"qmax", 10}}), ConfigInvalid);
  EXPECT_THROW(ExperimentConfig::parse({{"kind", "approx"}}), ConfigInvalid);
  EXPECT_THROW(ExperimentConfig::parse({{"kind", "nope"}}), ConfigInvalid);
  EXPECT_THROW(ExperimentConfig::parse({{"kind", "approx"}, {"y", "sqrt(2)"}, {"precision", 32}}), ConfigInvalid);
  EXPECT_THROW(ExperimentConfig::parse({{"kind", "singular"}, {"y", "sqrt(2)"}, {"c_grid", {"1/2", "-1"}}}), ConfigInvalid);
  EXPECT_THROW(ExperimentConfig::parse_text("{not json"), ConfigInvalid);
  try {
    ExperimentConfig::parse({{"kind", "approx"}, {"y", "sqrt(2)"}, {"bogus", 1}, {"q_max", 0}});
    FAIL();
  } catch (const ConfigInvalid& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("bogus"), std::string::npos);
    EXPECT_NE(msg.find("q_max"), std::string::npos);
  }
}

TEST(Run, RerunIsByteIdenticalAndReused) {
  const fs::path out = scratch("rerun");
  const auto cfg = approx_config(out);
  const RunRecord a = run(cfg);
  EXPECT_EQ(a.status, "ok");
  EXPECT_FALSE(a.reproduced);
  std::map<std::string, std::string> first;
  for (const auto& p : a.artifacts) first[p] = slurp(p);
  const RunRecord b = run(cfg);
  EXPECT_TRUE(b.reproduced);
  EXPECT_EQ(b.directory, a.directory);
  for (const auto& p : b.artifacts) EXPECT_EQ(slurp(p), first.at(p)) << p;
  fs::remove_all(out);
}

TEST(Run, DifferingArtifactsGetSiblingDirectory) {
  const fs::path out = scratch("sibling");
  const auto cfg = approx_config(out);
  const RunRecord a = run(cfg);
  std::ofstream(fs::path(a.directory) / "result.json", std::ios::app) << " ";
  const RunRecord b = run(cfg);
  EXPECT_FALSE(b.reproduced);
  EXPECT_EQ(b.directory, a.directory + "-r2");
  EXPECT_EQ(slurp(fs::path(a.directory) / "result.json"), slurp(fs::path(b.directory) / "result.json") + " ");
  fs::remove_all(out);
}

TEST(Run, LedgerIsAppendOnly) {
  const fs::path out = scratch("ledger");
  run(approx_config(out));
  const std::string before = slurp(out / "runs.jsonl");
  run(approx_config(out, 300));
  const std::string after = slurp(out / "runs.jsonl");
  ASSERT_EQ(after.compare(0, before.size(), before), 0);
  const auto recs = lines(after);
  ASSERT_EQ(recs.size(), 2u);
  for (const auto& l : recs) {
    const RunRecord r = RunRecord::from_json(json::parse(l));
    EXPECT_EQ(r.kind, "approx");
    EXPECT_EQ(r.version, kToolkitVersion);
    EXPECT_GE(r.wall_time, 0);
  }
  fs::remove_all(out);
}

TEST(Run, ArtifactsDoNotDependOnTheOutputRoot) {
  const fs::path a = scratch("root-a"), b = scratch("root-b");
  const RunRecord ra = run(approx_config(a)), rb = run(approx_config(b));
  EXPECT_EQ(fs::path(ra.directory).filename(), fs::path(rb.directory).filename());
  EXPECT_EQ(slurp(fs::path(ra.directory) / "result.json"), slurp(fs::path(rb.directory) / "result.json"));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Report, OrbitTrajectoryHasKPlusThreeColumns) {
  const fs::path out = scratch("orbit");
  for (const auto& [y, k] : std::vector<std::pair<std::string, std::size_t>>{{"1/3", 2}, {"sqrt(2), sqrt(3)", 3}}) {
    const auto cfg = ExperimentConfig::parse({{"kind", "orbit"}, {"y", y}, {"t_max", "6"}, {"out", out.string()}});
    const auto r = report(run(cfg).directory);
    const auto rows = lines(r.files.at("trajectory_plot.csv"));
    ASSERT_GT(rows.size(), 1u);
    EXPECT_EQ(static_cast<std::size_t>(std::count(rows[0].begin(), rows[0].end(), ',')) + 1, k + 3) << rows[0];
    EXPECT_EQ(rows.size(), 13u);
  }
  fs::remove_all(out);
}

TEST(Report, DichotomyTableAndXvalComparison) {
  const fs::path out = scratch("tables");
  const auto dich = ExperimentConfig::parse({{"kind", "dichotomy"},
                                             {"manifold", ManifoldSpec::mahler(2, {Scalar(1)}, {Scalar(2)}).to_json()},
                                             {"samples", 3},
                                             {"q_max", 300},
                                             {"out", out.string()}});
  const auto rd = report(run(dich).directory);
  EXPECT_EQ(lines(rd.files.at("verdicts.csv")).size(), 4u);
  EXPECT_NE(rd.summary.find("omega"), std::string::npos);

  const auto xval = ExperimentConfig::parse(
      {{"kind", "xval"}, {"y", "1/3"}, {"q_max", 1000}, {"t_max", "10"}, {"out", out.string()}});
  const auto rx = report(run(xval).directory);
  const auto cmp = lines(rx.files.at("comparison.csv"));
  ASSERT_EQ(cmp.size(), 4u);
  EXPECT_EQ(cmp[0], "quantity,direct,orbit");
  EXPECT_EQ(cmp[2], "consistent,1,1");
  fs::remove_all(out);
}

TEST(Report, MissingResultIsReported) {
  const fs::path out = scratch("missing");
  EXPECT_THROW(report(out / "nothing-here"), MissingArtifact);
  fs::remove_all(out);
}
