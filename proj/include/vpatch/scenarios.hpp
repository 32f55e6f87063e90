#pragma once

// Scenario configs: strict JSON, one kind per module pipeline. A run writes
// CSV series, a JSON report and optional SVG into the output directory.
//
//   { "name": "...", "kind": "contour", "parameters": {...},
//     "output": "out/name", "plot": false, "tolerances": {...} }
//
// Unknown keys are rejected everywhere. Parameters not given take the
// documented defaults; the normalized parameter set is echoed in the report.

#include "vpatch/report.hpp"
#include "vpatch/types.hpp"

#include <json.hpp>

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace vpatch {

enum class ScenarioKind {
  field_probe,
  angle_ode,
  transport_1d,
  spiral_1d,
  alexander,
  effective_odd,
  effective_single,
  contour,
  oddodd
};

const char* kind_name(ScenarioKind k);
const std::vector<ScenarioKind>& all_kinds();

/// Config error carrying the JSON path of the offending key.
class ConfigError : public InvalidInput {
 public:
  ConfigError(std::string path, const std::string& message)
      : InvalidInput(path + ": " + message), path_(std::move(path)), message_(message) {}
  const std::string& path() const { return path_; }
  const std::string& message() const { return message_; }
  nlohmann::json to_json() const { return {{"error", "config"}, {"path", path_}, {"message", message_}}; }

 private:
  std::string path_;
  std::string message_;
};

struct Scenario {
  std::string name;
  ScenarioKind kind = ScenarioKind::field_probe;
  /// Normalized: every parameter present, defaults filled.
  nlohmann::json parameters;
  std::filesystem::path output;
  bool plot = false;
  /// Check name -> tolerance, defaults filled.
  std::map<std::string, double> tolerances;
};

Scenario parse_scenario(const nlohmann::json& j);
Scenario parse_scenario(const std::filesystem::path& path);

/// Runs the scenario into s.output (created if missing). Module errors become a
/// failed report and a `.failed` marker next to the partial artifacts.
RunReport run_scenario(const Scenario& s);

/// Runs acceptance criterion id into `output`: report.json plus checks.csv
/// (one row per check), and the `.failed` marker on numerical failure.
RunReport run_acceptance_scenario(int id, const std::filesystem::path& output);

// ---- golden regression --------------------------------------------------------

struct RegressEntry {
  std::string scenario;
  std::string file;
  enum class Status { pass, fail, fresh } status = Status::pass;
  double worst = 0.0;  // largest tolerance-normalized deviation
  std::string detail;
};

/// Numeric CSV comparison: same header and row count, every cell within
/// abs + rel * |golden| of the golden value. Tolerances per column, with the
/// "*" entry as the default.
RegressEntry compare_csv(const std::filesystem::path& golden, const std::filesystem::path& current,
                         const std::map<std::string, std::pair<double, double>>& tol);

/// Every subdirectory of golden_dir holding scenario.json is rerun into
/// work_dir/<subdir>; each produced CSV is compared to the golden copy, or
/// reported as fresh when the golden copy is missing. A scenario.json of the
/// form {"acceptance": "<criterion name>"} reruns that acceptance criterion.
std::vector<RegressEntry> regress(const std::filesystem::path& golden_dir, const std::filesystem::path& work_dir);

}  // namespace vpatch
