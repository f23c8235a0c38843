#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "cpgbo/harness.hpp"

namespace cpgbo {

using Json = nlohmann::json;

inline constexpr const char* kScenarioFormat = "cpgbo-scenario/1";
inline constexpr const char* kRunLogFormat = "cpgbo-run-log/1";

/// Thrown for malformed configs and logs; the message names the offending key.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Parses YAML (.yaml/.yml) or JSON (anything else) into a JSON document.
Json load_document(const std::filesystem::path& path);
Json yaml_to_json(const std::string& text);

/// Strict parse: unknown keys, wrong types and failed validation all throw
/// ConfigError. Missing keys keep their defaults.
ScenarioConfig scenario_from_json(const Json& doc);
/// Complete, explicit form of a config (every field written).
Json scenario_to_json(const ScenarioConfig& config);
ScenarioConfig load_scenario(const std::filesystem::path& path);

/// Full run log: config, per-trial rows, last-5 summary and steady-state
/// traces (velocity, pitch, foot forces, joint power) of every trial.
Json run_log(const ScenarioConfig& config, const ScenarioResult& result);

struct LoggedRun {
  ScenarioConfig config;
  RunReport report;
  std::vector<TrialRecord> trials;  // traces rebuilt from the log; objective as logged online
};

LoggedRun parse_run_log(const Json& log);
LoggedRun read_run_log(const std::filesystem::path& path);

/// trial, 8 params, c_load, c_slope, mean_vx, CoT, J, beta, aborted
std::string trials_csv(const RunReport& report);
/// Per-trial series for velocity/CoT/objective/context panels.
std::string plot_csv(const RunReport& report);

struct ExportPaths {
  std::filesystem::path trials_csv;
  std::filesystem::path log_json;
  std::filesystem::path plot_csv;
};

/// Writes trials.csv, run_log.json and plot.csv under out_dir (created if
/// needed). Throws std::runtime_error if a file cannot be written.
ExportPaths export_results(const std::filesystem::path& out_dir, const ScenarioConfig& config,
                           const ScenarioResult& result);

void write_text(const std::filesystem::path& path, const std::string& text);

struct Stat {
  double mean = 0.0;
  double stddev = 0.0;
  double median = 0.0;
};
Stat describe(std::vector<double> values);

struct AblationRow {
  ControllerVariant variant;
  int runs = 0;
  Stat mean_vx;
  Stat cost_of_transport;
  Stat objective;
};

/// Groups last-5 summaries by variant, in the order variants first appear.
std::vector<AblationRow> ablation_table(const std::vector<RunReport>& reports);
std::string format_ablation(const std::vector<AblationRow>& rows);
std::string ablation_csv(const std::vector<AblationRow>& rows);

}  // namespace cpgbo
