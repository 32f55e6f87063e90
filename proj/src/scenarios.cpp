#include "vpatch/scenarios.hpp"

#include "vpatch/acceptance.hpp"
#include "vpatch/angle_odes.hpp"
#include "vpatch/contour_dynamics.hpp"
#include "vpatch/effective_corner.hpp"
#include "vpatch/homogeneous_transport.hpp"
#include "vpatch/velocity_field.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <set>
#include <sstream>

namespace vpatch {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct KindInfo {
  ScenarioKind kind;
  const char* name;
};

constexpr KindInfo kKinds[] = {
    {ScenarioKind::field_probe, "field_probe"},       {ScenarioKind::angle_ode, "angle_ode"},
    {ScenarioKind::transport_1d, "transport_1d"},     {ScenarioKind::spiral_1d, "spiral_1d"},
    {ScenarioKind::alexander, "alexander"},           {ScenarioKind::effective_odd, "effective_odd"},
    {ScenarioKind::effective_single, "effective_single"}, {ScenarioKind::contour, "contour"},
    {ScenarioKind::oddodd, "oddodd"},
};

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

// Strict reader over one JSON object: every accessor records its key and the
// normalized value; finish() rejects whatever was not read.
class Params {
 public:
  Params(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_, "expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }
  std::string at(const std::string& key) const { return path_ + "." + key; }

  double number(const std::string& key, std::optional<double> def, double lo, double hi, bool open_lo = false,
                bool open_hi = false, const std::string& rule = "") {
    used_.insert(key);
    double v;
    if (!j_.contains(key)) {
      if (!def) throw ConfigError(at(key), "required number missing");
      v = *def;
    } else {
      if (!j_[key].is_number()) throw ConfigError(at(key), "expected a number");
      v = j_[key].get<double>();
    }
    const bool below = open_lo ? !(v > lo) : !(v >= lo);
    const bool above = open_hi ? !(v < hi) : !(v <= hi);
    if (!std::isfinite(v) || below || above) {
      std::string msg = rule.empty() ? "must lie in " + std::string(open_lo ? "(" : "[") + fmt(lo) + ", " + fmt(hi) +
                                           (open_hi ? ")" : "]")
                                     : rule;
      throw ConfigError(at(key), msg + " (got " + fmt(v) + ")");
    }
    out[key] = v;
    return v;
  }

  int integer(const std::string& key, std::optional<int> def, int lo, int hi, const std::string& rule = "") {
    used_.insert(key);
    int v;
    if (!j_.contains(key)) {
      if (!def) throw ConfigError(at(key), "required integer missing");
      v = *def;
    } else {
      if (!j_[key].is_number_integer()) throw ConfigError(at(key), "expected an integer");
      v = j_[key].get<int>();
    }
    if (v < lo || v > hi)
      throw ConfigError(at(key), (rule.empty() ? "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]"
                                               : rule) +
                                     " (got " + std::to_string(v) + ")");
    out[key] = v;
    return v;
  }

  bool boolean(const std::string& key, bool def) {
    used_.insert(key);
    bool v = def;
    if (j_.contains(key)) {
      if (!j_[key].is_boolean()) throw ConfigError(at(key), "expected true or false");
      v = j_[key].get<bool>();
    }
    out[key] = v;
    return v;
  }

  std::string choice(const std::string& key, std::optional<std::string> def, const std::vector<std::string>& options) {
    used_.insert(key);
    std::string v;
    if (!j_.contains(key)) {
      if (!def) throw ConfigError(at(key), "required string missing");
      v = *def;
    } else {
      if (!j_[key].is_string()) throw ConfigError(at(key), "expected a string");
      v = j_[key].get<std::string>();
    }
    if (std::find(options.begin(), options.end(), v) == options.end()) {
      std::string list;
      for (const auto& o : options) list += (list.empty() ? "" : ", ") + o;
      throw ConfigError(at(key), "must be one of {" + list + "} (got '" + v + "')");
    }
    out[key] = v;
    return v;
  }

  std::vector<double> numbers(const std::string& key, std::optional<std::vector<double>> def, double lo, double hi,
                              std::size_t min_size = 0, bool open = false) {
    used_.insert(key);
    std::vector<double> v;
    if (!j_.contains(key)) {
      if (!def) throw ConfigError(at(key), "required array missing");
      v = *def;
    } else {
      if (!j_[key].is_array()) throw ConfigError(at(key), "expected an array of numbers");
      for (std::size_t i = 0; i < j_[key].size(); ++i) {
        const auto& e = j_[key][i];
        if (!e.is_number()) throw ConfigError(at(key) + "[" + std::to_string(i) + "]", "expected a number");
        v.push_back(e.get<double>());
      }
    }
    if (v.size() < min_size) throw ConfigError(at(key), "needs at least " + std::to_string(min_size) + " entries");
    for (std::size_t i = 0; i < v.size(); ++i) {
      const bool bad = open ? !(v[i] > lo && v[i] < hi) : !(v[i] >= lo && v[i] <= hi);
      if (!std::isfinite(v[i]) || bad)
        throw ConfigError(at(key) + "[" + std::to_string(i) + "]",
                          "must lie in " + std::string(open ? "(" : "[") + fmt(lo) + ", " + fmt(hi) + (open ? ")" : "]"));
    }
    out[key] = v;
    return v;
  }

  std::vector<Point> points(const std::string& key, std::vector<Point> def) {
    used_.insert(key);
    if (j_.contains(key)) {
      if (!j_[key].is_array()) throw ConfigError(at(key), "expected an array of [x1, x2] pairs");
      def.clear();
      for (std::size_t i = 0; i < j_[key].size(); ++i) {
        const auto& e = j_[key][i];
        if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
          throw ConfigError(at(key) + "[" + std::to_string(i) + "]", "expected [x1, x2]");
        def.emplace_back(e[0].get<double>(), e[1].get<double>());
      }
    }
    json arr = json::array();
    for (const auto& p : def) arr.push_back({p(0), p(1)});
    out[key] = arr;
    return def;
  }

  IntervalProfile profile(const std::string& key) {
    used_.insert(key);
    if (!j_.contains(key)) throw ConfigError(at(key), "required profile missing");
    IntervalProfile p;
    try {
      from_json(j_[key], p);
      p.validate();
    } catch (const ConfigError&) {
      throw;
    } catch (const InvalidInput& e) {
      throw ConfigError(at(key), e.what());
    }
    json o;
    to_json(o, p);
    out[key] = o;
    return p;
  }

  // {"cos": [[k, a], ...], "sin": [[k, b], ...]}
  FourierProfile modes(const std::string& key, int degree) {
    used_.insert(key);
    if (!j_.contains(key)) throw ConfigError(at(key), "required modes missing");
    Params m(j_[key], at(key));
    FourierProfile h(degree);
    for (const char* part : {"cos", "sin"}) {
      m.used_.insert(part);
      if (!m.j_.contains(part)) continue;
      const auto& arr = m.j_[part];
      const std::string where = m.at(part);
      if (!arr.is_array()) throw ConfigError(where, "expected an array of [k, amplitude] pairs");
      for (std::size_t i = 0; i < arr.size(); ++i) {
        const auto& e = arr[i];
        const std::string w = where + "[" + std::to_string(i) + "]";
        if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number())
          throw ConfigError(w, "expected [k, amplitude] with integer k");
        const int k = e[0].get<int>();
        if (k < 0 || k > degree) throw ConfigError(w, "mode index must lie in [0, degree]");
        if (std::string(part) == "sin" && k == 0) throw ConfigError(w, "sin mode 0 does not exist");
        (std::string(part) == "cos" ? h.cos_coeffs() : h.sin_coeffs())(k) += e[1].get<double>();
      }
    }
    m.finish();
    out[key] = j_[key];
    return h;
  }

  void finish() const {
    for (const auto& [key, _] : j_.items())
      if (!used_.count(key)) throw ConfigError(at(key), "unknown key");
  }

  json out = json::object();

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

// Tolerance names and defaults per kind.
std::map<std::string, double> default_tolerances(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::field_probe: return {{"closed_form", 1e-6}};
    case ScenarioKind::angle_ode: return {{"sum_zeta", 1e-8}};
    case ScenarioKind::transport_1d: return {{"integral", 1e-6}};
    case ScenarioKind::spiral_1d: return {};
    case ScenarioKind::alexander: return {};
    case ScenarioKind::effective_odd: return {{"exp_residual", 1e-2}, {"tail_increment", 1e-6}};
    case ScenarioKind::effective_single: return {{"second_order", 1e-5}};
    case ScenarioKind::contour: return {{"area", 1e-6}, {"angle", 0.01}, {"speed", 0.02}};
    case ScenarioKind::oddodd: return {{"delta", 0.05}};
  }
  return {};
}

// Validates and fills the kind-specific parameters.
json normalize(ScenarioKind kind, const json& raw) {
  Params p(raw, "parameters");
  switch (kind) {
    case ScenarioKind::field_probe: {
      const auto g = p.choice("geometry", "disc", {"disc", "sector_stack"});
      if (g == "disc") {
        p.number("radius", 1.0, 0.0, kInf, true);
      } else {
        p.profile("profile");
        const double ri = p.number("r_inner", 0.0, 0.0, kInf);
        p.number("r_outer", 1.0, ri, kInf, true);
      }
      p.points("points", {Point(0.3, 0.4), Point(-0.2, 0.1), Point(2.0, 1.0)});
      p.number("amplitude", 1.0, -kInf, kInf);
      break;
    }
    case ScenarioKind::angle_ode: {
      const int m = p.integer("m", std::nullopt, 3, 64, "m >= 3 is required: the corner-angle ODEs need m-fold symmetry");
      const auto zeta = p.numbers("zeta", std::nullopt, 0.0, kTwoPi / m, 1, true);
      const auto gamma = p.numbers("gamma", std::vector<double>(zeta.size() - 1, 0.1), 0.0, kTwoPi / m, 0, true);
      if (gamma.size() + 1 != zeta.size()) throw ConfigError("parameters.gamma", "needs one entry fewer than zeta");
      p.number("beta1", 0.0, -kPi, kPi);
      p.number("dt", 0.01, 0.0, 1.0, true);
      p.number("T", 10.0, 0.0, 1e6, true);
      p.choice("rhs", "endpoint", {"endpoint", "closed_form"});
      p.choice("form", "printed", {"printed", "kernel_exact"});
      MultiCornerState s;
      s.m = m;
      s.zeta = zeta;
      s.gamma = gamma;
      try {
        s.validate();
      } catch (const InvalidInput& e) {
        throw ConfigError("parameters", e.what());
      }
      break;
    }
    case ScenarioKind::transport_1d:
    case ScenarioKind::spiral_1d: {
      if (p.has("profile") == p.has("modes"))
        throw ConfigError("parameters", "give exactly one of 'profile' (intervals) or 'modes' (Fourier)");
      int sym;
      if (p.has("profile")) {
        const auto h = p.profile("profile");
        sym = h.is_full_circle() ? 0 : h.symmetry_order;
      } else {
        const int degree = p.integer("degree", 64, 1, 4096);
        sym = detect_symmetry(p.modes("modes", degree));
      }
      if (kind == ScenarioKind::transport_1d && sym != 0 && sym < 3)
        throw ConfigError("parameters", "h must be m-fold rotationally symmetric for some m >= 3 (found m = " +
                                            std::to_string(sym) + ")");
      if (kind == ScenarioKind::spiral_1d) p.number("pitch", std::nullopt, 0.0, 1e3, true, false, "pitch c must be > 0");
      p.number("T", 1.0, 0.0, 1e4, true);
      p.number("dt", 0.01, 0.0, 1.0, true);
      p.integer("characteristics", 1024, 16, 1 << 16);
      p.integer("solve_degree", 512, 8, 1 << 14);
      break;
    }
    case ScenarioKind::alexander: {
      const auto theta = p.numbers("theta", std::nullopt, -kPi, kPi, 1);
      for (std::size_t i = 1; i < theta.size(); ++i)
        if (!(theta[i] > theta[i - 1])) throw ConfigError("parameters.theta", "must be strictly increasing");
      if (!(theta.back() - theta.front() < kTwoPi)) throw ConfigError("parameters.theta", "first and last mass coincide");
      const auto w = p.numbers("weight", std::vector<double>(theta.size(), 1.0), 0.0, kInf, 1, false);
      if (w.size() != theta.size()) throw ConfigError("parameters.weight", "needs one entry per mass");
      p.number("pitch", 1.0, 0.0, 1e3, true);
      p.number("T", 1.0, 0.0, 1e4, true);
      p.number("dt", 0.01, 0.0, 1.0, true);
      break;
    }
    case ScenarioKind::effective_odd: {
      const auto mode = p.choice("mode", "contracting", {"expanding", "contracting"});
      p.number("A0", kPi / 4, 0.0, kPi / 2, true, true, "A0 must lie in the open interval (0, pi/2)");
      const double T = p.number("T", mode == "expanding" ? 50.0 : 1000.0, 0.0, 1e6, true);
      p.number("dtau", 1e-3, 0.0, 1.0, true);
      const double lo = p.number("fit_from", mode == "expanding" ? std::min(5.0, T / 2) : T / 10, 0.0, T);
      p.number("fit_to", T, lo, T, true);
      break;
    }
    case ScenarioKind::effective_single: {
      p.number("B0", kPi / 8, 0.0, kPi / 4, true, true, "B0 must lie in the open interval (0, pi/4)");
      p.number("T", 200.0, 0.0, 1e6, true);
      p.number("dtau", 1e-3, 0.0, 1.0, true);
      break;
    }
    case ScenarioKind::contour: {
      const auto shape = p.choice("shape", "petal", {"petal", "sector", "disc"});
      if (shape == "petal") {
        p.integer("m", 3, 2, 64);
        p.number("R", 0.5, 0.0, 10.0, true);
      } else if (shape == "sector") {
        const int m = p.integer("m", 3, 1, 64);
        const double a = p.number("theta_a", -0.3, -kPi, kPi);
        p.number("theta_b", 0.3, a, a + kTwoPi / m, true, true, "theta_b must exceed theta_a by less than 2pi/m");
        p.number("R", 0.25, 0.0, 10.0, true);
      } else {
        p.number("R", 1.0, 0.0, 10.0, true);
        p.integer("n", 256, 8, 1 << 16);
      }
      p.number("amplitude", 1.0, -kInf, kInf);
      p.number("T", 1.0, 0.0, 1e3, true);
      p.number("cfl", 0.25, 0.0, 1.0, true);
      p.number("dt_max", 0.02, 0.0, 1.0, true);
      p.integer("frames", 10, 1, 10000);
      p.numbers("scales", std::vector<double>{1e-2, 1e-3}, 0.0, kInf, 0, true);
      break;
    }
    case ScenarioKind::oddodd: {
      p.number("T", 0.2, 0.0, 10.0, true);
      p.boolean("reversed", false);
      p.numbers("x", std::vector<double>{1e-2, 1e-3, 1e-4}, 0.0, 0.5, 1, true);
      break;
    }
  }
  p.finish();
  return p.out;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream os(p);
  if (!os) throw NumericalFailure("cannot write " + p.string());
  os.precision(17);
  return os;
}

// ---- per-kind runners --------------------------------------------------------------

void run_field_probe(const Scenario& s, RunReport& rep) {
  const auto& P = s.parameters;
  const double amp = P["amplitude"];
  const bool disc = P["geometry"] == "disc";
  std::optional<PatchGeometry> g;
  if (disc) {
    g.emplace(SectorStack::disc(P["radius"].get<double>(), amp));
  } else {
    IntervalProfile h;
    from_json(P["profile"], h);
    g.emplace(SectorStack::from_profile(h, P["r_inner"], P["r_outer"], amp));
  }
  std::vector<Point> pts;
  for (const auto& e : P["points"]) pts.emplace_back(e[0].get<double>(), e[1].get<double>());
  auto os = open_out(s.output / "field.csv");
  write_field_csv(os, *g, pts);
  bool converged = true;
  double err = 0.0;
  for (const auto& x : pts) {
    const auto q = biot_savart_velocity(*g, x);
    converged = converged && q.converged;
    if (disc) {
      const double R = P["radius"];
      const Velocity exact = x.norm() < R ? Velocity(0.5 * amp * perp(x)) : Velocity(amp * R * R * perp(x) / (2 * x.squaredNorm()));
      err = std::max(err, (q.value - exact).norm());
    }
  }
  rep.checks.push_back(Check::near("quadrature converged at every point", converged ? 1 : 0, 1, 0));
  if (disc) rep.checks.push_back(Check::below("disc closed form", err, s.tolerances.at("closed_form")));
}

void run_angle_ode(const Scenario& s, RunReport& rep) {
  const auto& P = s.parameters;
  MultiCornerState st;
  st.m = P["m"];
  st.zeta = P["zeta"].get<std::vector<double>>();
  st.gamma = P["gamma"].get<std::vector<double>>();
  st.beta1 = P["beta1"];
  AngleIntegrateOptions opt;
  opt.rhs = P["rhs"] == "endpoint" ? RhsSelector::endpoint : RhsSelector::closed_form;
  opt.form = P["form"] == "printed" ? ClosedForm::printed : ClosedForm::kernel_exact;
  const auto tr = integrate(st, P["dt"], P["T"], opt);
  auto os = open_out(s.output / "angles.csv");
  write_angle_csv(os, tr);
  if (tr.collision) throw NumericalFailure(tr.diagnostic);
  double drift = 0.0;
  for (const auto& a : tr.samples) drift = std::max(drift, std::abs(a.sum_zeta - tr.samples[0].sum_zeta));
  rep.checks.push_back(Check::below("sum zeta drift", drift, s.tolerances.at("sum_zeta")));
  if (st.corners() == 1) rep.metadata["rotation_speed"] = rotation_speed(st.zeta[0], st.m);
}

void run_transport(const Scenario& s, RunReport& rep, bool spiral) {
  const auto& P = s.parameters;
  TransportOptions opt;
  opt.characteristics = P["characteristics"];
  opt.degree = P["solve_degree"];
  const double T = P["T"], dt = P["dt"];
  TransportTrajectory tr;
  if (P.contains("profile")) {
    IntervalProfile h;
    from_json(P["profile"], h);
    tr = spiral ? evolve_spiral(h, P["pitch"], T, dt, opt) : evolve_profile(h, T, dt);
  } else {
    const int degree = P["degree"];
    FourierProfile h(degree);
    for (const auto& e : P["modes"].value("cos", json::array())) h.cos_coeffs()(e[0].get<int>()) += e[1].get<double>();
    for (const auto& e : P["modes"].value("sin", json::array())) h.sin_coeffs()(e[0].get<int>()) += e[1].get<double>();
    tr = spiral ? evolve_spiral(h, P["pitch"], T, dt, opt) : evolve_profile(h, T, dt, opt);
  }
  auto os = open_out(s.output / "characteristics.csv");
  write_characteristics_csv(os, tr);
  rep.checks.push_back(Check::near("characteristics stay ordered", tr.ordering_violation ? 0 : 1, 1, 0));
  if (tr.ordering_violation) rep.metadata["ordering"] = tr.diagnostic;
  std::vector<double> integral;
  for (const auto& th : tr.theta) integral.push_back(characteristic_integral(th, tr.value));
  rep.metadata["integral"] = integral;
  if (!spiral && !P.contains("profile")) {
    double drift = 0.0;
    for (double v : integral) drift = std::max(drift, std::abs(v - integral.front()));
    rep.checks.push_back(Check::below("integral of h conserved", drift, s.tolerances.at("integral")));
  }
}

void run_alexander(const Scenario& s, RunReport& rep) {
  const auto& P = s.parameters;
  AlexanderState st;
  const auto th = P["theta"].get<std::vector<double>>();
  const auto w = P["weight"].get<std::vector<double>>();
  st.theta = Eigen::Map<const Eigen::VectorXd>(th.data(), th.size());
  st.weight = Eigen::Map<const Eigen::VectorXd>(w.data(), w.size());
  st.pitch = P["pitch"];
  const auto tr = evolve_alexander(st, P["T"], P["dt"]);
  auto os = open_out(s.output / "alexander.csv");
  write_alexander_csv(os, tr);
  if (tr.collision) throw NumericalFailure(tr.diagnostic);
  rep.checks.push_back(Check::near("no collision", 1, 1, 0));
}

void run_effective_odd(const Scenario& s, RunReport& rep) {
  const auto& P = s.parameters;
  const bool expanding = P["mode"] == "expanding";
  const auto tr = odd_corner_integrate(P["A0"], expanding ? 1 : -1, P["T"], P["dtau"]);
  auto os = open_out(s.output / "effective_odd.csv");
  write_effective_csv(os, tr);
  if (tr.halted) throw NumericalFailure(tr.diagnostic);
  if (expanding) {
    const auto fit = fit_expanding(tr, P["fit_from"], P["fit_to"]);
    rep.metadata["rate"] = fit.rate;
    rep.metadata["certified_rate"] = fit.certified_rate;
    rep.checks.push_back(Check::above("exponential rate", fit.rate, 0.0));
    rep.checks.push_back(Check::below("exponential fit residual", fit.residual, s.tolerances.at("exp_residual")));
  } else {
    const auto b = fit_contracting(tr, P["fit_from"], P["fit_to"]);
    rep.metadata["slope"] = b.slope;
    rep.metadata["J_inf"] = tr.samples.back().J;
    rep.metadata["predicted_slope"] = -2.0 / kPi * tr.samples.back().J;
    rep.checks.push_back(Check::above("lower constant c", b.c, 0.0));
    rep.checks.push_back(Check::above("upper constant C", b.C, 0.0));
    rep.checks.push_back(Check::below("tail increment", b.tail_increment, s.tolerances.at("tail_increment")));
  }
}

void run_effective_single(const Scenario& s, RunReport& rep) {
  const auto& P = s.parameters;
  const double B0 = P["B0"];
  const auto a = single_corner_integrate(B0, P["T"], P["dtau"]);
  const auto b = single_corner_second_order(B0, P["T"], P["dtau"]);
  {
    auto os = open_out(s.output / "single_corner.csv");
    write_effective_csv(os, a);
    auto os2 = open_out(s.output / "single_corner_second_order.csv");
    write_effective_csv(os2, b);
  }
  double gap = 0.0;
  for (std::size_t i = 0; i < std::min(a.samples.size(), b.samples.size()); ++i) {
    if (a.samples[i].B < 1e-6 || a.samples[i].B > kPi / 4 - 1e-6) break;
    gap = std::max({gap, std::abs(a.samples[i].A - b.samples[i].A), std::abs(a.samples[i].B - b.samples[i].B)});
  }
  rep.checks.push_back(Check::below("forms agree on shared window", gap, s.tolerances.at("second_order")));
  rep.checks.push_back(
      Check::near("A'(0)", a.samples[0].dA, -std::cos(2 * B0) * std::sin(2 * B0) / kPi, 0.0));
  rep.metadata["second_order_halted"] = b.halted;
  rep.metadata["A_end"] = a.samples.back().A;
  rep.metadata["B_end"] = a.samples.back().B;
}

void write_angles(std::ostream& os, double t, const std::vector<CornerAngleEstimate>& est) {
  for (const auto& e : est)
    os << t << ',' << e.r << ',' << (e.skipped ? 1 : 0) << ',' << e.sup_angle << ',' << e.angle << ',' << e.center
       << ',' << e.fraction << '\n';
}

void run_contour(const Scenario& s, RunReport& rep) {
  const auto& P = s.parameters;
  const std::string shape = P["shape"];
  const double amp = P["amplitude"];
  PatchContour c;
  std::optional<double> zeta, center;
  int m = 1;
  if (shape == "petal") {
    m = P["m"];
    const double R = P["R"];
    c = petal_contour(m, R, default_mesh(R), amp);
    zeta = kPi / m;
    center = kPi / (2 * m);
  } else if (shape == "sector") {
    m = P["m"];
    const double R = P["R"], a = P["theta_a"], b = P["theta_b"];
    c = sector_contour(a, b, R, m, default_mesh(R), amp);
    zeta = b - a;
    center = 0.5 * (a + b);
  } else {
    c = disc_contour(P["R"], P["n"], amp);
  }
  const auto scales = P["scales"].get<std::vector<double>>();
  const double area0 = c.area();
  const double T = P["T"];
  const int frames = P["frames"];
  const double speed = zeta && m >= 3 ? amp * rotation_speed(*zeta, m) : 0.0;

  EvolveOptions opt;
  opt.cfl = P["cfl"];
  opt.dt_max = P["dt_max"];
  auto contour_csv = open_out(s.output / "contour.csv");
  auto angles_csv = open_out(s.output / "angles.csv");
  angles_csv << "t,r,skipped,sup_angle,angle,center,fraction\n";
  write_contour_csv(contour_csv, c, true);
  auto measure = [&](const PatchContour& cc, double t) {
    if (!zeta || scales.empty()) return std::vector<CornerAngleEstimate>{};
    auto est = measure_corner_angle(cc, scales, *center + speed * t);
    write_angles(angles_csv, t, est);
    return est;
  };
  measure(c, 0.0);
  double extent = 0.0;
  for (const auto& l : c.loops)
    for (const auto& n : l.nodes) extent = std::max(extent, n.p.norm());
  extent *= 1.1;
  auto svg = [&](const PatchContour& cc, int k) {
    if (!s.plot) return;
    std::ostringstream name;
    name << "frame_" << k << ".svg";
    std::ofstream os(s.output / name.str());
    write_contour_svg(os, cc, extent);
  };
  svg(c, 0);
  std::vector<CornerAngleEstimate> last;
  int steps = 0, remeshes = 0;
  for (int k = 1; k <= frames; ++k) {
    const auto res = evolve(c, T / frames, opt);
    steps += res.steps;
    remeshes += res.remeshes;
    c = res.contour;
    if (res.halted) throw NumericalFailure(res.diagnostic);
    write_contour_csv(contour_csv, c, false);
    last = measure(c, T * k / frames);
    svg(c, k);
  }
  rep.metadata["steps"] = steps;
  rep.metadata["remeshes"] = remeshes;
  rep.metadata["nodes"] = c.node_count();
  rep.checks.push_back(Check::below("area drift", std::abs(c.area() - area0), s.tolerances.at("area")));
  if (zeta && m >= 3) {
    rep.metadata["rotation_speed"] = speed;
    for (const auto& e : last) {
      if (e.skipped) continue;
      rep.checks.push_back(Check::below("relative angle drift at r = " + fmt(e.r), std::abs(e.angle - *zeta) / *zeta,
                                        s.tolerances.at("angle")));
      rep.checks.push_back(Check::below("relative rotation speed error at r = " + fmt(e.r),
                                        std::abs((e.center - *center) / T - speed) / std::abs(speed),
                                        s.tolerances.at("speed")));
    }
  }
}

void run_oddodd(const Scenario& s, RunReport& rep) {
  const auto& P = s.parameters;
  const bool reversed = P["reversed"];
  const auto r = oddodd_experiment(P["T"], reversed, P["x"].get<std::vector<double>>());
  auto os = open_out(s.output / "tracers.csv");
  os << "t,x,z1,z2,alpha_hat,z1_over_z2\n";
  for (std::size_t k = 0; k < r.times.size(); ++k)
    for (std::size_t i = 0; i < r.x.size(); ++i)
      os << r.times[k] << ',' << r.x[i] << ',' << r.z[k][i](0) << ',' << r.z[k][i](1) << ',' << r.alpha_hat[k][i]
         << ',' << r.ratio[k][i] << '\n';
  rep.metadata["report"] = to_json(r);
  if (r.truncated) throw NumericalFailure(r.diagnostic);
  const auto& a = r.alpha_hat.back();
  const double delta = s.tolerances.at("delta");
  if (!reversed)
    rep.checks.push_back(Check::above("min alpha_hat - 1 (angle opens)", *std::min_element(a.begin(), a.end()) - 1, delta));
  else
    rep.checks.push_back(Check::above("1 - max alpha_hat (angle closes)", 1 - *std::max_element(a.begin(), a.end()), delta));
}

}  // namespace

const char* kind_name(ScenarioKind k) {
  for (const auto& i : kKinds)
    if (i.kind == k) return i.name;
  return "";
}

const std::vector<ScenarioKind>& all_kinds() {
  static const std::vector<ScenarioKind> v = [] {
    std::vector<ScenarioKind> out;
    for (const auto& i : kKinds) out.push_back(i.kind);
    return out;
  }();
  return v;
}

Scenario parse_scenario(const json& j) {
  if (!j.is_object()) throw ConfigError("$", "expected an object");
  for (const auto& [key, _] : j.items())
    if (key != "name" && key != "kind" && key != "parameters" && key != "output" && key != "plot" &&
        key != "tolerances")
      throw ConfigError(key, "unknown key");
  Scenario s;
  if (!j.contains("name") || !j["name"].is_string() || j["name"].get<std::string>().empty())
    throw ConfigError("name", "required non-empty string");
  s.name = j["name"];
  if (s.name.find_first_of("/\\") != std::string::npos) throw ConfigError("name", "must not contain path separators");
  if (!j.contains("kind") || !j["kind"].is_string()) throw ConfigError("kind", "required string");
  const std::string kind = j["kind"];
  bool found = false;
  for (const auto& i : kKinds)
    if (kind == i.name) {
      s.kind = i.kind;
      found = true;
    }
  if (!found) throw ConfigError("kind", "unknown kind '" + kind + "'");
  s.parameters = normalize(s.kind, j.value("parameters", json::object()));
  if (j.contains("output")) {
    if (!j["output"].is_string()) throw ConfigError("output", "expected a string");
    s.output = j["output"].get<std::string>();
  } else {
    s.output = fs::path("out") / s.name;
  }
  if (j.contains("plot")) {
    if (!j["plot"].is_boolean()) throw ConfigError("plot", "expected true or false");
    s.plot = j["plot"];
  }
  s.tolerances = default_tolerances(s.kind);
  if (j.contains("tolerances")) {
    if (!j["tolerances"].is_object()) throw ConfigError("tolerances", "expected an object");
    for (const auto& [key, v] : j["tolerances"].items()) {
      const std::string where = "tolerances." + key;
      if (!s.tolerances.count(key)) throw ConfigError(where, "unknown check for kind " + kind);
      if (!v.is_number() || !(v.get<double>() > 0.0)) throw ConfigError(where, "tolerance must be a positive number");
      s.tolerances[key] = v.get<double>();
    }
  }
  return s;
}

Scenario parse_scenario(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("$", "cannot open " + path.string());
  json j;
  try {
    j = json::parse(is);
  } catch (const json::parse_error& e) {
    throw ConfigError("$", std::string("malformed JSON: ") + e.what());
  }
  return parse_scenario(j);
}

RunReport run_scenario(const Scenario& s) {
  RunReport rep;
  rep.scenario = s.name;
  fs::create_directories(s.output);
  fs::remove(s.output / ".failed");
  rep.metadata["kind"] = kind_name(s.kind);
  rep.metadata["parameters"] = s.parameters;
  const auto start = std::chrono::steady_clock::now();
  try {
    switch (s.kind) {
      case ScenarioKind::field_probe: run_field_probe(s, rep); break;
      case ScenarioKind::angle_ode: run_angle_ode(s, rep); break;
      case ScenarioKind::transport_1d: run_transport(s, rep, false); break;
      case ScenarioKind::spiral_1d: run_transport(s, rep, true); break;
      case ScenarioKind::alexander: run_alexander(s, rep); break;
      case ScenarioKind::effective_odd: run_effective_odd(s, rep); break;
      case ScenarioKind::effective_single: run_effective_single(s, rep); break;
      case ScenarioKind::contour: run_contour(s, rep); break;
      case ScenarioKind::oddodd: run_oddodd(s, rep); break;
    }
  } catch (const NumericalFailure& e) {
    rep.failed_numerically = true;
    rep.diagnostic = e.what();
  } catch (const InvalidInput& e) {
    rep.failed_numerically = true;
    rep.diagnostic = std::string("module rejected input: ") + e.what();
  }
  rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (rep.failed_numerically) std::ofstream(s.output / ".failed") << rep.diagnostic << '\n';
  std::ofstream(s.output / "report.json") << to_json(rep).dump(2) << '\n';
  return rep;
}

RunReport run_acceptance_scenario(int id, const fs::path& output) {
  fs::create_directories(output);
  fs::remove(output / ".failed");
  const auto rep = run_acceptance(id);
  {
    auto os = open_out(output / "checks.csv");
    os << "check,measured,expected,tolerance,pass\n";
    for (const auto& c : rep.checks) {
      std::string name = c.name;
      std::replace(name.begin(), name.end(), ',', ';');
      os << name << ',' << c.measured << ',' << c.expected << ',' << c.tolerance << ',' << (c.pass ? 1 : 0) << '\n';
    }
  }
  if (rep.failed_numerically) std::ofstream(output / ".failed") << rep.diagnostic << '\n';
  std::ofstream(output / "report.json") << to_json(rep).dump(2) << '\n';
  return rep;
}

// ---- regression ---------------------------------------------------------------------

namespace {

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::ifstream is(p);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(is, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(std::move(cells));
  }
  return rows;
}

std::optional<double> as_number(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) return std::nullopt;
  return v;
}

}  // namespace

RegressEntry compare_csv(const fs::path& golden, const fs::path& current,
                         const std::map<std::string, std::pair<double, double>>& tol) {
  RegressEntry e;
  e.file = golden.filename().string();
  const auto g = read_csv(golden);
  const auto c = read_csv(current);
  auto fail = [&](const std::string& why) {
    e.status = RegressEntry::Status::fail;
    e.detail = why;
    return e;
  };
  if (g.empty() || c.empty()) return fail("empty file");
  if (g[0] != c[0]) return fail("header differs");
  if (g.size() != c.size()) return fail("row count " + std::to_string(c.size()) + " vs golden " + std::to_string(g.size()));
  const auto deflt = tol.count("*") ? tol.at("*") : std::pair<double, double>{1e-10, 1e-8};
  for (std::size_t r = 1; r < g.size(); ++r) {
    if (g[r].size() != c[r].size()) return fail("row " + std::to_string(r) + ": cell count differs");
    for (std::size_t k = 0; k < g[r].size(); ++k) {
      const std::string& col = k < g[0].size() ? g[0][k] : "";
      const auto gv = as_number(g[r][k]);
      const auto cv = as_number(c[r][k]);
      if (!gv || !cv) {
        if (g[r][k] != c[r][k]) return fail("row " + std::to_string(r) + ", column " + col + ": text differs");
        continue;
      }
      const auto [abs_tol, rel_tol] = tol.count(col) ? tol.at(col) : deflt;
      const double allowed = abs_tol + rel_tol * std::abs(*gv);
      const double dev = std::abs(*cv - *gv);
      const double norm = allowed > 0 ? dev / allowed : (dev > 0 ? kInf : 0.0);
      if (!(dev <= allowed) && !(std::isnan(*gv) && std::isnan(*cv))) {
        e.worst = norm;
        return fail("row " + std::to_string(r) + ", column " + col + ": " + fmt(*cv) + " vs golden " + fmt(*gv));
      }
      e.worst = std::max(e.worst, norm);
    }
  }
  return e;
}

std::vector<RegressEntry> regress(const fs::path& golden_dir, const fs::path& work_dir) {
  if (!fs::is_directory(golden_dir)) throw ConfigError("$", "golden directory not found: " + golden_dir.string());
  std::vector<fs::path> cases;
  for (const auto& d : fs::directory_iterator(golden_dir))
    if (d.is_directory() && fs::exists(d.path() / "scenario.json")) cases.push_back(d.path());
  std::sort(cases.begin(), cases.end());
  std::vector<RegressEntry> out;
  for (const auto& dir : cases) {
    const fs::path output = work_dir / dir.filename();
    std::string name;
    RunReport rep;
    std::ifstream is(dir / "scenario.json");
    json j;
    try {
      j = json::parse(is);
    } catch (const json::parse_error& e) {
      throw ConfigError("$", (dir / "scenario.json").string() + ": malformed JSON: " + e.what());
    }
    if (j.is_object() && j.contains("acceptance")) {
      const int id = j.size() == 1 && j["acceptance"].is_string() ? acceptance_id(j["acceptance"]) : 0;
      if (id == 0) throw ConfigError("acceptance", "expected the name of an acceptance criterion as the only key");
      name = acceptance_name(id);
      rep = run_acceptance_scenario(id, output);
    } else {
      Scenario s = parse_scenario(j);
      s.output = output;
      s.plot = false;
      name = s.name;
      rep = run_scenario(s);
    }
    std::map<std::string, std::pair<double, double>> tol;
    if (fs::exists(dir / "tolerances.json")) {
      std::ifstream is(dir / "tolerances.json");
      const json t = json::parse(is);
      for (const auto& [col, v] : t.items()) {
        if (!v.is_array() || v.size() != 2) throw ConfigError(col, "tolerance entry must be [abs, rel]");
        tol[col] = {v[0].get<double>(), v[1].get<double>()};
      }
    }
    std::set<std::string> seen;
    for (const auto& f : fs::directory_iterator(output)) {
      if (f.path().extension() != ".csv") continue;
      const std::string fname = f.path().filename().string();
      seen.insert(fname);
      RegressEntry e;
      if (!fs::exists(dir / fname)) {
        e.file = fname;
        e.status = RegressEntry::Status::fresh;
        e.detail = "no golden copy";
      } else {
        e = compare_csv(dir / fname, f.path(), tol);
      }
      e.scenario = name;
      out.push_back(e);
    }
    for (const auto& f : fs::directory_iterator(dir)) {
      const std::string fname = f.path().filename().string();
      if (f.path().extension() == ".csv" && !seen.count(fname))
        out.push_back({name, fname, RegressEntry::Status::fail, 0.0,
                       rep.failed_numerically ? "not produced: " + rep.diagnostic : "not produced"});
    }
  }
  std::sort(out.begin(), out.end(), [](const RegressEntry& a, const RegressEntry& b) {
    return std::tie(a.scenario, a.file) < std::tie(b.scenario, b.file);
  });
  return out;
}

}  // namespace vpatch
