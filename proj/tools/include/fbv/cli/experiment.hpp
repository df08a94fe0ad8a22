#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

// Experiment harness behind the `fbv` command. A config names one of five
// experiments plus string-valued keys; every experiment declares its keys,
// defaults and thresholds in a table so the CLI, INI files and reports agree.
namespace fbv::cli {

/// Bad config: unknown experiment, unknown key or unparsable value. Exit code 2.
class UsageError : public std::runtime_error {
 public:
  UsageError(const std::string& key, const std::string& message)
      : std::runtime_error(key.empty() ? message : key + ": " + message), key_(key) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

struct KeySpec {
  std::string name;
  std::string default_value;
  std::string help;
  /// Thresholds only move the verdict, never the measurements.
  bool threshold = false;
};

struct ExperimentSpec {
  std::string name;
  std::string summary;
  std::vector<KeySpec> keys;
};

/// bmk-verify, bmk-lp, mollify, green-stokes, young-scan.
const std::vector<ExperimentSpec>& experiments();
/// Throws UsageError for an unknown name.
const ExperimentSpec& experiment_spec(const std::string& name);

/// Keys shared by every experiment: level, eps, p, seed, out, format.
const std::vector<KeySpec>& common_keys();

struct ExperimentConfig {
  std::string experiment;
  /// Every key of the experiment; missing ones are filled from the defaults.
  std::map<std::string, std::string> values;
};

/// Fills defaults and checks names and values. Throws UsageError.
ExperimentConfig resolve(const std::string& experiment, const std::map<std::string, std::string>& overrides);

struct Check {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  /// "<=" or "<" or ">=" or "==".
  std::string relation;
  bool pass = false;
};

struct Report {
  std::string experiment;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  std::vector<Check> checks;
  /// Set when the numerics threw; the verdict is then fail.
  std::string error;
  nlohmann::json metadata = nlohmann::json::object();
  double wall_seconds = 0.0;

  bool pass() const;
};

/// Deterministic given the config: the same config gives the same rows.
Report run_experiment(const ExperimentConfig& config);

/// CSV: header line plus rows, 17 significant digits.
void write_rows_csv(std::ostream& out, const Report& report);
/// {"experiment", "verdict", "checks", "config", "metadata", "wall_seconds", "columns", "row_count"},
/// plus "rows" when `with_rows`.
nlohmann::json report_json(const Report& report, const ExperimentConfig& config, bool with_rows);

/// format "csv": rows to `path`, metadata to `path` + ".json". format "json": one
/// file with the rows inside. Throws fbv::Error when a file cannot be written.
void emit_report(const Report& report, const ExperimentConfig& config, const std::filesystem::path& path,
                 const std::string& format);

/// The whole command line. Returns 0 pass, 1 fail, 2 usage.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fbv::cli
