#pragma once

// Named numeric checks and the report a scenario run produces.

#include <json.hpp>

#include <string>
#include <vector>

namespace vpatch {

struct Check {
  enum class Relation { near, below, above };

  std::string name;
  double measured = 0.0;
  /// Target for `near`, bound for `below` and `above`.
  double expected = 0.0;
  /// Allowed |measured - expected| for `near`; 0 otherwise.
  double tolerance = 0.0;
  Relation relation = Relation::near;
  bool pass = false;

  static Check near(std::string name, double measured, double expected, double tolerance);
  static Check below(std::string name, double measured, double bound);
  static Check above(std::string name, double measured, double bound);
};

struct RunReport {
  std::string scenario;
  std::vector<Check> checks;
  double wall_time = 0.0;
  /// Free-form measurements that are reported, not asserted.
  nlohmann::json metadata = nlohmann::json::object();
  bool failed_numerically = false;
  std::string diagnostic;

  bool pass() const;
  const Check* worst() const;
};

nlohmann::json to_json(const Check& c);
nlohmann::json to_json(const RunReport& r);
/// One line: PASS/FAIL, name, then the first failing check (or the last check).
std::string summary_line(const RunReport& r);

}  // namespace vpatch
