#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <json.hpp>

#include "semiclass/config.hpp"

namespace fs = std::filesystem;
using namespace semiclass;
using nlohmann::json;

namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(SEMICLASS_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string without_timestamp(const std::string& text) {
  std::istringstream in(text);
  std::string line, out;
  while (std::getline(in, line))
    if (line.find("\"timestamp\"") == std::string::npos) out += line + "\n";
  return out;
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("semiclass_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST(Config, DefaultsOfNamedExperiment) {
  const auto c = parse_config(json{{"experiment", "hermite-lq"}});
  EXPECT_EQ(c.experiment, "hermite-lq");
  EXPECT_EQ(c.d, 1);
  EXPECT_EQ(c.q.size(), 6u);
  EXPECT_NEAR(c.grid.dx_over_h, 1.0 / 6.0, 1e-15);
}

TEST(Config, RejectsUnknownKeys) {
  EXPECT_THROW(parse_config(json{{"experiment", "zonal"}, {"colour", 3}}), ConfigError);
  EXPECT_THROW(parse_config(json{{"experiment", "zonal"}, {"grid", {{"dx", 0.1}}}}), ConfigError);
  EXPECT_THROW(parse_config(json{{"experiment", "zonal"}, {"h_sweep", {{"hmax", 0.1}}}}), ConfigError);
  EXPECT_THROW(parse_config(json{{"experiment", "zonal"}, {"potential", {{"type", "harmonic"}, {"k", 1}}}}),
               ConfigError);
}

TEST(Config, RejectsInvalidValues) {
  EXPECT_THROW(parse_config(json{{"experiment", "no-such-thing"}}), ConfigError);
  EXPECT_THROW(parse_config(json::object()), ConfigError);
  EXPECT_THROW(parse_config(json{{"experiment", "zonal"}}, "hermite-lq"), ConfigError);
  EXPECT_THROW(parse_config(json{{"experiment", "zonal"}, {"d", 4}}), ConfigError);
  EXPECT_THROW(parse_config(json{{"experiment", "zonal"}, {"E", -1.0}}), ConfigError);
  EXPECT_THROW(parse_config(json{{"experiment", "zonal"}, {"h_sweep", {{"h_min", 0.5}, {"h_max", 0.1}}}}),
               ConfigError);
  EXPECT_THROW(parse_config(json{{"experiment", "zonal"}, {"h_sweep", {{"count", 3}}}}), ConfigError);
  EXPECT_THROW(parse_config(json{{"experiment", "zonal"}, {"q", {1.0, 0.5}}}), ConfigError);
  EXPECT_THROW(parse_config(json{{"experiment", "zonal"}, {"seed", -3}}), ConfigError);
  EXPECT_THROW(parse_config(json{{"experiment", "zonal"}, {"potential", {{"type", "polynomial"},
                                                                          {"coefficients", {0, 1}}}}}),
               ConfigError);
}

TEST(Config, RoundTrip) {
  const json in{{"experiment", "cluster-upper-bounds"},
                {"potential", {{"type", "polynomial"}, {"coefficients", {1.0, 0.0, -2.0, 0.0, 1.0}}}},
                {"E", 0.5},
                {"q", {2, 6, "inf"}},
                {"h_sweep", {{"h_max", 0.03}, {"h_min", 0.002}, {"count", 5}}},
                {"seed", 42}};
  const auto c = parse_config(in);
  EXPECT_TRUE(std::isinf(c.q.back()));
  const auto again = parse_config(config_to_json(c));
  EXPECT_EQ(config_to_json(again), config_to_json(c));
  EXPECT_EQ(again.seed, 42u);
  EXPECT_EQ(potential_name(again.potential), "polynomial");

  const json quad{{"experiment", "gaussian-groundstate"},
                  {"potential", {{"type", "quadratic"}, {"H", {{8.0}}}, {"x0", {-1.0}}}}};
  const auto cq = parse_config(quad);
  EXPECT_EQ(config_to_json(parse_config(config_to_json(cq))), config_to_json(cq));
}

TEST(Config, ShippedConfigsParse) {
  int n = 0;
  for (const auto& e : fs::directory_iterator(SEMICLASS_CONFIG_DIR)) {
    if (e.path().extension() != ".json") continue;
    EXPECT_NO_THROW(load_config(e.path().string())) << e.path();
    ++n;
  }
  EXPECT_EQ(n, static_cast<int>(experiment_registry().size()));
}

TEST(Config, ParseErrorCarriesPosition) {
  const auto dir = scratch("parse");
  std::ofstream(dir / "bad.json") << "{\"experiment\": \"zonal\",\n \"d\": }";
  try {
    load_config((dir / "bad.json").string());
    FAIL() << "no exception";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
}

TEST(Cli, ListAndPrintConfig) {
  EXPECT_EQ(run_cli("--list"), 0);
  EXPECT_EQ(run_cli("zonal --print-config"), 0);
  EXPECT_EQ(run_cli("--help"), 0);
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run_cli(""), 2);
  EXPECT_EQ(run_cli("not-an-experiment"), 2);
  EXPECT_EQ(run_cli("zonal --config /nonexistent/file.json"), 2);
  EXPECT_EQ(run_cli("zonal --bogus-flag"), 2);
}

TEST(Cli, MalformedConfigWritesNothing) {
  const auto dir = scratch("malformed");
  std::ofstream(dir / "cfg.json") << R"({"experiment": "exponent-tables", "unknown": 1})";
  EXPECT_EQ(run_cli("--config " + (dir / "cfg.json").string() + " --out " + (dir / "out").string()), 2);
  EXPECT_FALSE(fs::exists(dir / "out" / "results.csv"));
  std::ofstream(dir / "broken.json") << R"({"experiment": )";
  EXPECT_EQ(run_cli("--config " + (dir / "broken.json").string() + " --out " + (dir / "out").string()), 2);
  EXPECT_FALSE(fs::exists(dir / "out"));
}

TEST(Cli, RunWritesOutputsAndIsReproducible) {
  const auto dir = scratch("rerun");
  const auto out = dir / "out";
  ASSERT_EQ(run_cli("exponent-tables --out " + out.string()), 0);
  const auto results = slurp(out / "results.csv"), verdicts = slurp(out / "verdicts.csv"),
             meta = slurp(out / "meta.json");
  EXPECT_EQ(results.rfind("h,q,region,", 0), 0u) << results.substr(0, 80);
  EXPECT_EQ(verdicts.rfind("check,pass,mandatory,value,expected,tolerance,margin,detail", 0), 0u);
  const auto m = json::parse(meta);
  EXPECT_TRUE(m["pass"].get<bool>());
  EXPECT_EQ(m["experiment"], "exponent-tables");
  EXPECT_TRUE(m.contains("versions"));

  ASSERT_EQ(run_cli("exponent-tables --out " + out.string()), 0);
  EXPECT_EQ(slurp(out / "results.csv"), results);
  EXPECT_EQ(slurp(out / "verdicts.csv"), verdicts);
  EXPECT_EQ(without_timestamp(slurp(out / "meta.json")), without_timestamp(meta));
  for (const auto& e : fs::directory_iterator(out)) EXPECT_NE(e.path().filename().string().front(), '.');
}

TEST(Cli, SeedOverrideIsEchoed) {
  const auto dir = scratch("seed");
  ASSERT_EQ(run_cli("exponent-tables --seed 77 --out " + (dir / "o").string()), 0);
  EXPECT_EQ(json::parse(slurp(dir / "o" / "meta.json"))["config"]["seed"], 77);
}

TEST(Cli, FailedCheckExitsOne) {
  // A grid far too coarse for h lowers the discrete eigenvalues enough to break the count ratio.
  const auto dir = scratch("fail");
  std::ofstream(dir / "cfg.json") << R"({"experiment": "weyl-count", "grid": {"dx_over_h": 2.0}})";
  EXPECT_EQ(run_cli("--config " + (dir / "cfg.json").string() + " --out " + (dir / "o").string()), 1);
  EXPECT_TRUE(fs::exists(dir / "o" / "verdicts.csv"));
}
