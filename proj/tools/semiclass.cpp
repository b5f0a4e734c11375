// semiclass <experiment> [--config file.json] [--out dir] [--seed n] [--print-config]
//
// Runs one named experiment and writes results.csv, verdicts.csv and meta.json
// into the output directory. Exit codes: 0 all mandatory checks pass, 1 a check
// failed, 2 usage or configuration error, 3 numerical failure.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <boost/version.hpp>
#include <json.hpp>

#include "semiclass/semiclass.hpp"

namespace fs = std::filesystem;
using namespace semiclass;

namespace {

enum Exit { kPass = 0, kCheckFailed = 1, kUsage = 2, kNumerical = 3 };

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// All three files are staged under temporary names and renamed at the end, so a
// failed run never leaves a partial table behind.
class Staging {
 public:
  explicit Staging(fs::path dir) : dir_(std::move(dir)) {}

  void add(const std::string& name, const std::string& content) {
    const fs::path tmp = dir_ / ("." + name + ".tmp");
    std::ofstream out(tmp, std::ios::binary);
    out << content;
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    files_.emplace_back(tmp, dir_ / name);
  }

  void commit() {
    for (const auto& [tmp, dst] : files_) fs::rename(tmp, dst);
    files_.clear();
  }

  ~Staging() {
    std::error_code ec;
    for (const auto& [tmp, dst] : files_) fs::remove(tmp, ec);
  }

 private:
  fs::path dir_;
  std::vector<std::pair<fs::path, fs::path>> files_;
};

nlohmann::json meta_json(const ExperimentConfig& cfg, const ExperimentResult& r) {
  nlohmann::json versions{{"semiclass", "1.0.0"},
                          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                        std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                        std::to_string(EIGEN_MINOR_VERSION)},
                          {"boost", BOOST_LIB_VERSION},
                          {"compiler", __VERSION__}};
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : r.checks)
    checks.push_back({{"check", c.label}, {"pass", c.pass}, {"mandatory", c.mandatory}});
  return {{"timestamp", utc_timestamp()},
          {"experiment", r.name},
          {"pass", r.pass()},
          {"config", config_to_json(cfg)},
          {"versions", versions},
          {"checks", checks},
          {"warnings", r.diagnostics.warnings},
          {"notes", r.diagnostics.notes}};
}

void print_summary(const ExperimentResult& r) {
  for (const auto& c : r.checks)
    std::printf("%-4s %s%s  value=%.6g expected=%.6g tol=%.3g\n", c.pass ? "ok" : "FAIL",
                c.label.c_str(), c.mandatory ? "" : " [info]", c.value, c.expected, c.tolerance);
  for (const auto& w : r.diagnostics.warnings) std::printf("warning: %s\n", w.c_str());
  std::printf("%s: %s\n", r.name.c_str(), r.pass() ? "PASS" : "FAIL");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semiclassical L^q spectral-cluster experiments"};
  std::string experiment, config_path, out_dir;
  std::uint64_t seed = 0;
  bool list = false, print_config = false;
  app.add_option("experiment", experiment, "Experiment name (see --list)");
  app.add_option("--config,-c", config_path, "JSON configuration file")->check(CLI::ExistingFile);
  app.add_option("--out,-o", out_dir, "Output directory (overrides the config)");
  auto* seed_opt = app.add_option("--seed", seed, "RNG seed (overrides the config)");
  app.add_flag("--list", list, "List experiments and exit");
  app.add_flag("--print-config", print_config, "Print the resolved configuration as JSON and exit");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kPass : kUsage;
  }

  if (list) {
    for (const auto& e : experiment_registry()) std::printf("%s\n", std::string(e.name).c_str());
    return kPass;
  }

  ExperimentConfig cfg;
  try {
    if (experiment.empty() && config_path.empty()) throw ConfigError("no experiment given (try --list)");
    if (config_path.empty()) {
      cfg = parse_config(nlohmann::json::object(), experiment);
    } else {
      cfg = load_config(config_path, experiment);
    }
    if (!out_dir.empty()) cfg.out = out_dir;
    if (seed_opt->count() > 0) cfg.seed = seed;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kUsage;
  }

  if (print_config) {
    std::printf("%s\n", config_to_json(cfg).dump(2).c_str());
    return kPass;
  }

  ExperimentResult result;
  try {
    result = run_experiment(cfg);
  } catch (const ConvergenceError& e) {
    std::fprintf(stderr, "%s: numerical failure: %s\n", cfg.experiment.c_str(), e.what());
    return kNumerical;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "%s: %s\n", cfg.experiment.c_str(), e.what());
    return kNumerical;
  }

  try {
    fs::create_directories(cfg.out);
    std::ostringstream results, verdicts;
    write_results_csv(results, result);
    write_verdicts_csv(verdicts, result);
    Staging stage(cfg.out);
    stage.add("results.csv", results.str());
    stage.add("verdicts.csv", verdicts.str());
    stage.add("meta.json", meta_json(cfg, result).dump(2) + "\n");
    stage.commit();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "cannot write outputs to '%s': %s\n", cfg.out.c_str(), e.what());
    return kUsage;
  }

  print_summary(result);
  return result.pass() ? kPass : kCheckFailed;
}
