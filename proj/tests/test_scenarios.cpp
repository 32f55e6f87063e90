#include "vpatch/scenarios.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <sstream>

using namespace vpatch;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("vpatch_test_scenarios_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

// Returns the path of the ConfigError thrown by parsing j, or "" if none.
std::string error_path(const json& j, std::string* message = nullptr) {
  try {
    parse_scenario(j);
  } catch (const ConfigError& e) {
    if (message) *message = e.message();
    return e.path();
  }
  return "";
}

}  // namespace

TEST(Scenario, MinimalDiscFillsDefaults) {
  const auto s = parse_scenario(json{{"name", "d"}, {"kind", "field_probe"}});
  EXPECT_EQ(s.kind, ScenarioKind::field_probe);
  EXPECT_EQ(s.parameters["geometry"], "disc");
  EXPECT_EQ(s.parameters["radius"], 1.0);
  EXPECT_EQ(s.parameters["amplitude"], 1.0);
  EXPECT_EQ(s.parameters["points"].size(), 3u);
  EXPECT_EQ(s.output, fs::path("out") / "d");
  EXPECT_FALSE(s.plot);
  EXPECT_EQ(s.tolerances.at("closed_form"), 1e-6);
}

TEST(Scenario, EveryKindParsesFromDefaultsOrMinimalParameters) {
  const json minimal = {
      {"field_probe", json::object()},
      {"angle_ode", {{"m", 3}, {"zeta", {0.5}}}},
      {"transport_1d", {{"modes", {{"cos", {{3, 1.0}}}}}}},
      {"spiral_1d", {{"modes", {{"cos", {{1, 1.0}}}}}, {"pitch", 1.0}}},
      {"alexander", {{"theta", {0.0, 1.0}}}},
      {"effective_odd", json::object()},
      {"effective_single", json::object()},
      {"contour", json::object()},
      {"oddodd", json::object()},
  };
  for (auto k : all_kinds()) {
    const std::string name = kind_name(k);
    ASSERT_TRUE(minimal.contains(name)) << name;
    const auto s = parse_scenario(json{{"name", "x"}, {"kind", name}, {"parameters", minimal[name]}});
    EXPECT_EQ(s.kind, k);
    // Normalization is idempotent.
    const auto again = parse_scenario(json{{"name", "x"}, {"kind", name}, {"parameters", s.parameters}});
    EXPECT_EQ(again.parameters, s.parameters) << name;
  }
}

TEST(Scenario, AngleOdeRejectsTwoFoldSymmetry) {
  std::string msg;
  EXPECT_EQ(error_path({{"name", "a"}, {"kind", "angle_ode"}, {"parameters", {{"m", 2}, {"zeta", {0.5}}}}}, &msg),
            "parameters.m");
  EXPECT_NE(msg.find("m >= 3"), std::string::npos);
}

TEST(Scenario, SingleCornerRejectsQuarterPi) {
  std::string msg;
  EXPECT_EQ(error_path({{"name", "b"}, {"kind", "effective_single"}, {"parameters", {{"B0", M_PI / 4}}}}, &msg),
            "parameters.B0");
  EXPECT_NE(msg.find("(0, pi/4)"), std::string::npos);
  EXPECT_EQ(error_path({{"name", "b"}, {"kind", "effective_single"}, {"parameters", {{"B0", 0.0}}}}), "parameters.B0");
  EXPECT_EQ(error_path({{"name", "b"}, {"kind", "effective_single"}, {"parameters", {{"B0", 0.5}}}}), "");
}

TEST(Scenario, UnknownKeysAreRejectedWithTheirPath) {
  EXPECT_EQ(error_path({{"name", "c"}, {"kind", "field_probe"}, {"colour", "red"}}), "colour");
  EXPECT_EQ(error_path({{"name", "c"}, {"kind", "field_probe"}, {"parameters", {{"radiuss", 2}}}}),
            "parameters.radiuss");
  EXPECT_EQ(error_path({{"name", "c"},
                        {"kind", "transport_1d"},
                        {"parameters", {{"modes", {{"cos", {{3, 1.0}}}, {"tan", json::array()}}}}}}),
            "parameters.modes.tan");
  EXPECT_EQ(error_path({{"name", "c"}, {"kind", "field_probe"}, {"tolerances", {{"area", 1e-3}}}}), "tolerances.area");
}

TEST(Scenario, MalformedValuesAreRejected) {
  EXPECT_EQ(error_path({{"kind", "field_probe"}}), "name");
  EXPECT_EQ(error_path({{"name", "e"}, {"kind", "warp_drive"}}), "kind");
  EXPECT_EQ(error_path({{"name", "e"}, {"kind", "field_probe"}, {"tolerances", {{"closed_form", -1}}}}),
            "tolerances.closed_form");
  EXPECT_EQ(error_path({{"name", "e"}, {"kind", "field_probe"}, {"parameters", {{"radius", "big"}}}}),
            "parameters.radius");
  EXPECT_EQ(error_path({{"name", "e"}, {"kind", "contour"}, {"parameters", {{"shape", "star"}}}}),
            "parameters.shape");
  EXPECT_EQ(error_path({{"name", "e"}, {"kind", "angle_ode"}, {"parameters", {{"m", 3}, {"zeta", {0.5, 0.5}}, {"gamma", {0.1, 0.1}}}}}),
            "parameters.gamma");
  EXPECT_EQ(error_path({{"name", "e"}, {"kind", "alexander"}, {"parameters", {{"theta", {1.0, 0.5}}}}}),
            "parameters.theta");
  // A two-fold symmetric datum has no transport law.
  EXPECT_EQ(error_path({{"name", "e"}, {"kind", "transport_1d"}, {"parameters", {{"modes", {{"cos", {{2, 1.0}}}}}}}}),
            "parameters");
  EXPECT_EQ(error_path({{"name", "e"},
                        {"kind", "transport_1d"},
                        {"parameters", {{"profile", {{"pieces", json::array()}}}, {"modes", json::object()}}}}),
            "parameters");
}

TEST(Scenario, ErrorJsonCarriesPath) {
  try {
    parse_scenario(json{{"name", "f"}, {"kind", "field_probe"}, {"parameters", {{"radius", -1}}}});
    FAIL();
  } catch (const ConfigError& e) {
    const auto j = e.to_json();
    EXPECT_EQ(j["error"], "config");
    EXPECT_EQ(j["path"], "parameters.radius");
  }
}

TEST(Scenario, RerunIsByteIdentical) {
  for (const json& j : {json{{"name", "probe"}, {"kind", "field_probe"}},
                        json{{"name", "ode"}, {"kind", "angle_ode"},
                             {"parameters", {{"m", 3}, {"zeta", {0.4, 0.3}}, {"gamma", {0.5}}, {"T", 2.0}}}}}) {
    auto s = parse_scenario(j);
    const auto dir_a = scratch("rerun_a");
    const auto dir_b = scratch("rerun_b");
    s.output = dir_a;
    const auto a = run_scenario(s);
    s.output = dir_b;
    const auto b = run_scenario(s);
    EXPECT_TRUE(a.pass()) << summary_line(a);
    EXPECT_TRUE(b.pass());
    int compared = 0;
    for (const auto& f : fs::directory_iterator(dir_a)) {
      if (f.path().extension() != ".csv") continue;
      EXPECT_EQ(slurp(f.path()), slurp(dir_b / f.path().filename())) << f.path();
      ++compared;
    }
    EXPECT_GT(compared, 0);
  }
}

TEST(Scenario, ReportIsWrittenNextToArtifacts) {
  auto s = parse_scenario(json{{"name", "rep"}, {"kind", "field_probe"}});
  s.output = scratch("report");
  run_scenario(s);
  std::ifstream is(s.output / "report.json");
  const auto j = json::parse(is);
  EXPECT_EQ(j["scenario"], "rep");
  EXPECT_TRUE(j["pass"].get<bool>());
  EXPECT_EQ(j["metadata"]["parameters"]["radius"], 1.0);
  EXPECT_FALSE(fs::exists(s.output / ".failed"));
}

TEST(CompareCsv, PassFailAndColumnTolerance) {
  const auto d = scratch("csv");
  write(d / "g.csv", "t,x,label\n0,1.0,a\n1,2.0,b\n");
  write(d / "same.csv", "t,x,label\n0,1.0,a\n1,2.0,b\n");
  write(d / "near.csv", "t,x,label\n0,1.0000001,a\n1,2.0,b\n");
  write(d / "text.csv", "t,x,label\n0,1.0,a\n1,2.0,c\n");
  write(d / "short.csv", "t,x,label\n0,1.0,a\n");
  write(d / "head.csv", "t,y,label\n0,1.0,a\n1,2.0,b\n");
  using S = RegressEntry::Status;
  EXPECT_EQ(compare_csv(d / "g.csv", d / "same.csv", {}).status, S::pass);
  EXPECT_EQ(compare_csv(d / "g.csv", d / "near.csv", {}).status, S::fail);
  EXPECT_EQ(compare_csv(d / "g.csv", d / "near.csv", {{"x", {1e-6, 0.0}}}).status, S::pass);
  EXPECT_EQ(compare_csv(d / "g.csv", d / "near.csv", {{"*", {0.0, 1e-6}}}).status, S::pass);
  EXPECT_EQ(compare_csv(d / "g.csv", d / "text.csv", {{"*", {1.0, 1.0}}}).status, S::fail);
  EXPECT_EQ(compare_csv(d / "g.csv", d / "short.csv", {}).status, S::fail);
  EXPECT_EQ(compare_csv(d / "g.csv", d / "head.csv", {}).status, S::fail);
  const auto e = compare_csv(d / "g.csv", d / "near.csv", {});
  EXPECT_NE(e.detail.find("column x"), std::string::npos);
}

TEST(Regress, FreshThenPassThenFail) {
  const auto golden = scratch("golden");
  const auto work = scratch("work");
  fs::create_directories(golden / "probe");
  write(golden / "probe" / "scenario.json", R"({ "name": "probe", "kind": "field_probe" })");
  auto r = regress(golden, work);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].status, RegressEntry::Status::fresh);
  EXPECT_EQ(r[0].file, "field.csv");

  fs::copy_file(work / "probe" / "field.csv", golden / "probe" / "field.csv");
  r = regress(golden, work);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].status, RegressEntry::Status::pass);

  write(golden / "probe" / "field.csv", "x1,x2,u1,u2,du11,du12,du21,du22\n0,0,0,0,0,0,0,0\n");
  r = regress(golden, work);
  EXPECT_EQ(r[0].status, RegressEntry::Status::fail);

  write(golden / "probe" / "extra.csv", "a\n1\n");
  r = regress(golden, work);
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r[0].file, "extra.csv");
  EXPECT_EQ(r[0].status, RegressEntry::Status::fail);
}

TEST(Regress, AcceptanceCriterionAsGoldenCase) {
  const auto golden = scratch("golden_acc");
  const auto work = scratch("work_acc");
  fs::create_directories(golden / "k");
  write(golden / "k" / "scenario.json", R"({ "acceptance": "acceptance_04_symmetrized_kernel" })");
  auto r = regress(golden, work);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].scenario, "acceptance_04_symmetrized_kernel");
  EXPECT_EQ(r[0].file, "checks.csv");
  EXPECT_EQ(r[0].status, RegressEntry::Status::fresh);

  write(golden / "k" / "scenario.json", R"({ "acceptance": "acceptance_99_nothing" })");
  EXPECT_THROW(regress(golden, work), ConfigError);
}
