#include "vpatch/report.hpp"

#include <cmath>
#include <sstream>

namespace vpatch {

Check Check::near(std::string name, double measured, double expected, double tolerance) {
  return {std::move(name), measured, expected, tolerance, Relation::near,
          std::abs(measured - expected) <= tolerance};
}

Check Check::below(std::string name, double measured, double bound) {
  return {std::move(name), measured, bound, 0.0, Relation::below, measured < bound};
}

Check Check::above(std::string name, double measured, double bound) {
  return {std::move(name), measured, bound, 0.0, Relation::above, measured > bound};
}

bool RunReport::pass() const {
  if (failed_numerically || checks.empty()) return false;
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

const Check* RunReport::worst() const {
  for (const auto& c : checks)
    if (!c.pass) return &c;
  return checks.empty() ? nullptr : &checks.back();
}

namespace {

const char* relation_name(Check::Relation r) {
  switch (r) {
    case Check::Relation::near: return "near";
    case Check::Relation::below: return "below";
    case Check::Relation::above: return "above";
  }
  return "";
}

std::string describe(const Check& c) {
  std::ostringstream os;
  os.precision(4);
  os << c.name << ": " << c.measured;
  switch (c.relation) {
    case Check::Relation::near: os << " vs " << c.expected << " +- " << c.tolerance; break;
    case Check::Relation::below: os << " < " << c.expected; break;
    case Check::Relation::above: os << " > " << c.expected; break;
  }
  return os.str();
}

}  // namespace

nlohmann::json to_json(const Check& c) {
  return {{"name", c.name},         {"measured", c.measured}, {"expected", c.expected},
          {"tolerance", c.tolerance}, {"relation", relation_name(c.relation)}, {"pass", c.pass}};
}

nlohmann::json to_json(const RunReport& r) {
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : r.checks) checks.push_back(to_json(c));
  nlohmann::json j{{"scenario", r.scenario}, {"pass", r.pass()},     {"checks", checks},
                   {"wall_time", r.wall_time}, {"metadata", r.metadata}};
  if (r.failed_numerically) j["diagnostic"] = r.diagnostic;
  return j;
}

std::string summary_line(const RunReport& r) {
  std::ostringstream os;
  os << (r.pass() ? "PASS " : "FAIL ") << r.scenario;
  if (r.failed_numerically)
    os << " | numerical failure: " << r.diagnostic;
  else if (const Check* c = r.worst())
    os << " | " << describe(*c);
  os.precision(3);
  os << " | " << r.wall_time << " s";
  return os.str();
}

}  // namespace vpatch
