#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "jetlab/harness.hpp"

using namespace jetlab;
namespace fs = std::filesystem;

namespace {

json bump_json() {
  return json::parse(R"({"mul": [{"plateau": {"arg": {"mul": [{"const": 2}, {"coord": 0}]}}},
                                 {"plateau": {"arg": {"mul": [{"const": 2}, {"coord": 1}]}}}]})");
}

json saddle_sigma(bool amplitude) {
  json s = {{"polynomial", json::array({{{"exponent", {2, 0}}, {"coef", 1}}, {{"exponent", {0, 2}}, {"coef", -1}}})}};
  if (amplitude) s["amplitude"] = bump_json();
  return s;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& name) {
  fs::path d = fs::path(testing::TempDir()) / ("jetlab_harness_" + name);
  fs::remove_all(d);
  return d;
}

RunOptions to(const fs::path& d) {
  RunOptions o;
  o.out_dir = d.string();
  return o;
}

json sweep_config() {
  return {{"mode", "sweep"},
          {"m", 2},
          {"r", 1},
          {"v", bump_json()},
          {"sweep",
           {{"construction", "estimate"},
            {"lattice", "product"},
            {"eps", {0.2, 0.1, 0.05}},
            {"ratio", {0.1, 0.05, 0.025}},
            {"kinds", {"phi"}}}}};
}

}  // namespace

TEST(FieldExpression, ConstantAndPlateau) {
  Field one = parse_field_expression(json{{"const", 1}}, 2);
  std::vector<double> x{0.3, -0.7};
  EXPECT_EQ(one.value(x)[0], 1.0);

  Field p = parse_field_expression(json::parse(R"({"plateau": {"arg": {"coord": 0}, "inner": 0.5, "outer": 1}})"), 1);
  Profile psi = Profile::plateau(0.5, 1.0, 4);
  for (double t : {0.0, 0.4, 0.6, 0.75, 0.9, 1.0, 1.2}) {
    std::vector<double> y{t};
    EXPECT_DOUBLE_EQ(p.value(y)[0], psi.derivatives(t, 0)[0]) << t;
  }
}

TEST(FieldExpression, TextArraysAndErrors) {
  Field f = parse_field_expression(json(R"([{"coord": 0}, {"coord": 1}])"), 2);
  EXPECT_EQ(f.out_dim(), 2);
  try {
    parse_field_expression(json::parse(R"({"add": [{"coord": 0}, {"sinh": {"coord": 0}}]})"), 1, "$.v");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("$.v.add[1]"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_field_expression(json{{"coord", 3}}, 2), Error);
  EXPECT_THROW(parse_field_expression(json("{not json"), 2), Error);
}

TEST(FieldExpression, DeepTreeRoundTripsByteIdentically) {
  json e = {{"coord", 0}};
  for (int d = 0; d < 6; ++d) {
    json pair = json::array({e, {{"const", "3/7"}}});
    e = d % 2 ? json{{"add", pair}} : json{{"mul", pair}};
  }
  Field f = parse_field_expression(e, 1);
  EXPECT_EQ(expr_to_json(f.expressions()->front()).dump(), e.dump());
}

TEST(Config, RejectsBadInputsWithPaths) {
  auto msg = [](const json& j) {
    try {
      parse_config(j);
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), "config");
      return std::string(e.what());
    }
    return std::string("accepted");
  };
  json ok = {{"mode", "transverse"}, {"m", 2}, {"r", 1}, {"eps", 0.2}, {"delta", 0.02}, {"v", bump_json()}};
  EXPECT_NO_THROW(parse_config(ok));

  json j = ok;
  j["epsilon"] = 0.1;
  EXPECT_NE(msg(j).find("$.epsilon"), std::string::npos);
  j = ok;
  j["mode"] = "wiggle";
  EXPECT_NE(msg(j).find("$.mode"), std::string::npos);
  j = ok;
  j["k"] = 2;
  EXPECT_NE(msg(j).find("$.k"), std::string::npos);
  j = ok;
  j["n"] = 3;
  EXPECT_NE(msg(j).find("$.n"), std::string::npos);
  j = ok;
  j["eps"] = 1.5;
  EXPECT_NE(msg(j).find("$.eps"), std::string::npos);
  j = ok;
  j["v"] = {{"coord", 2}};
  EXPECT_NE(msg(j).find("axis"), std::string::npos);
  j = ok;
  j.erase("delta");
  EXPECT_NE(msg(j).find("$.delta"), std::string::npos);
  j = ok;
  j["conormal"] = {1, 0, 0};
  EXPECT_NE(msg(j).find("$.conormal"), std::string::npos);

  json d = {{"mode", "decompose"}, {"m", 2}, {"r", 2}, {"sigma", saddle_sigma(false)}};
  EXPECT_NO_THROW(parse_config(d));
  d["sigma"]["polynomial"][0]["exponent"] = {1, 0};
  EXPECT_NE(msg(d).find("$.sigma.polynomial[0].exponent"), std::string::npos);

  json s = sweep_config();
  s["sweep"]["kinds"] = {"phi", "bogus"};
  EXPECT_NE(msg(s).find("$.sweep.kinds[1]"), std::string::npos);
}

TEST(Config, SchemaListsEveryMode) {
  json schema = config_schema();
  EXPECT_EQ(schema["properties"]["mode"]["enum"].get<std::vector<std::string>>(), experiment_modes());
  EXPECT_FALSE(schema["additionalProperties"].get<bool>());
}

TEST(Run, DecomposeSaddleGivesTwoTerms) {
  auto dir = fresh_dir("decompose");
  for (bool exact : {false, true}) {
    RunOptions o = to(dir);
    o.exact = exact;
    auto man = run_experiment(parse_config({{"mode", "decompose"}, {"m", 2}, {"r", 2}, {"sigma", saddle_sigma(!exact)}}), o);
    ASSERT_FALSE(man.error_code) << man.error_message.value_or("");
    EXPECT_EQ(man.exit_code(), 0);
    json dec = json::parse(slurp(dir / "decomposition.json"));
    ASSERT_EQ(dec["terms"].size(), 2u);
    EXPECT_EQ(dec["terms"][0]["conormal"], json({1, 0}));
    EXPECT_EQ(dec["terms"][1]["conormal"], json({0, 1}));
    EXPECT_EQ(dec["raw_terms"].size(), 5u);
    EXPECT_EQ(man.checks.at(0).value, 0.0);
  }
  // Plateau nodes have no exact evaluation.
  RunOptions o = to(dir);
  o.exact = true;
  auto man = run_experiment(parse_config({{"mode", "decompose"}, {"m", 2}, {"r", 2}, {"sigma", saddle_sigma(true)}}), o);
  EXPECT_EQ(man.exit_code(), 2);
}

TEST(Run, ZeroTransverseReportIsZeroAndSucceeds) {
  auto dir = fresh_dir("zero");
  json cfg = {{"mode", "transverse"}, {"m", 2}, {"r", 1}, {"eps", 0.2}, {"delta", 0.02}, {"v", {{"const", 0}}}};
  auto man = run_experiment(parse_config(cfg), to(dir));
  EXPECT_EQ(man.exit_code(), 0);
  json rep = json::parse(slurp(dir / "report.json"));
  EXPECT_EQ(rep["result"]["norms"]["sigma_cr"].get<double>(), 0.0);
  for (const auto& key : {"dist_c0_closeness", "perp_sup"})
    if (rep["result"]["measurements"].contains(key)) EXPECT_EQ(rep["result"]["measurements"][key].get<double>(), 0.0);
  EXPECT_EQ(man.files, (std::vector<std::string>{"config.json", "report.json", "checks.csv"}));
}

TEST(Run, SweepLatticeWritesNineRowsAndThreeFiles) {
  auto dir = fresh_dir("sweep");
  auto man = run_experiment(parse_config(sweep_config()), to(dir));
  ASSERT_EQ(man.exit_code(), 0) << man.error_message.value_or("");
  EXPECT_EQ(man.files.size(), 3u);
  for (const auto& f : man.files) EXPECT_TRUE(fs::exists(dir / f)) << f;
  std::string csv = slurp(dir / "sweep.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 10);

  auto again = fresh_dir("sweep_again");
  run_experiment(parse_config(sweep_config()), to(again));
  EXPECT_EQ(slurp(again / "sweep.csv"), csv);

  json stored = json::parse(slurp(dir / "config.json"));
  json manifest = json::parse(slurp(dir / "manifest.json"));
  EXPECT_EQ(manifest["config_hash"].get<std::string>(), hash_hex(config_hash(stored)));
  EXPECT_EQ(manifest["files"].size(), 3u);
}

TEST(Run, OperationErrorIsRecordedWithNonzeroExit) {
  auto dir = fresh_dir("error");
  json cfg = {{"mode", "transverse"}, {"m", 2}, {"r", 1}, {"eps", 0.2}, {"delta", 0.1}, {"v", bump_json()}};
  auto man = run_experiment(parse_config(cfg), to(dir));
  EXPECT_EQ(man.exit_code(), 2);
  json manifest = json::parse(slurp(dir / "manifest.json"));
  EXPECT_EQ(manifest["error"]["code"], "precondition");
  EXPECT_EQ(manifest["files"], json({"config.json"}));
}

TEST(Run, ExitCodeFollowsStructuralChecksOnly) {
  RunManifest m;
  EXPECT_EQ(m.exit_code(), 0);
  m.checks.push_back({"gluing", false, 1.0});
  m.structural_ok = false;
  EXPECT_EQ(m.exit_code(), 1);
  m.error_code = "precondition";
  EXPECT_EQ(m.exit_code(), 2);
}

TEST(Run, OutputDirectoryPrecedence) {
  RunOptions o;
  ::setenv("JETLAB_OUT_DIR", "/tmp/from_env", 1);
  EXPECT_EQ(resolve_out_dir(o, "from_config"), "/tmp/from_env");
  o.out_dir = "cli";
  EXPECT_EQ(resolve_out_dir(o, "from_config"), "cli");
  ::unsetenv("JETLAB_OUT_DIR");
  EXPECT_EQ(resolve_out_dir(RunOptions{}, "from_config"), "from_config");
  EXPECT_EQ(resolve_out_dir(RunOptions{}, ""), "jetlab_out");
}
