#include "vpatch/angle_odes.hpp"

#include "vpatch/polar_elliptic.hpp"
#include "vpatch/rk4.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <sstream>

namespace vpatch {

void MultiCornerState::validate() const {
  if (m < 3) throw InvalidInput("corner-angle dynamics requires m-fold symmetry with m >= 3");
  if (zeta.empty()) throw InvalidInput("at least one corner is required");
  if (gamma.size() + 1 != zeta.size()) throw InvalidInput("need exactly k - 1 gaps for k corners");
  for (double z : zeta)
    if (!(z > 0.0)) throw InvalidInput("corner angles must be positive");
  for (double g : gamma)
    if (!(g > 0.0)) throw InvalidInput("gaps must be positive");
  if (!(closing_gap() > 0.0)) throw InvalidInput("total angle must stay below 2 pi / m");
}

std::vector<double> MultiCornerState::betas() const {
  std::vector<double> b(zeta.size());
  b[0] = beta1;
  for (std::size_t j = 1; j < zeta.size(); ++j) b[j] = b[j - 1] + zeta[j - 1] + gamma[j - 1];
  return b;
}

Eigen::VectorXd MultiCornerState::endpoints() const {
  const auto b = betas();
  Eigen::VectorXd e(2 * zeta.size());
  for (std::size_t j = 0; j < zeta.size(); ++j) {
    e(2 * j) = b[j];
    e(2 * j + 1) = b[j] + zeta[j];
  }
  return e;
}

double MultiCornerState::closing_gap() const {
  double total = 0.0;
  for (double z : zeta) total += z;
  for (double g : gamma) total += g;
  return kTwoPi / m - total;
}

IntervalProfile MultiCornerState::profile() const {
  IntervalProfile p;
  p.symmetry_order = m;
  const auto b = betas();
  for (std::size_t j = 0; j < zeta.size(); ++j) {
    const double s = wrap_angle(b[j]);
    p.pieces.push_back({s, s + zeta[j], 1.0});
  }
  return p;
}

MultiCornerState MultiCornerState::from_endpoints(int m, const Eigen::VectorXd& ends, double t) {
  MultiCornerState s;
  s.m = m;
  s.t = t;
  const int k = static_cast<int>(ends.size() / 2);
  s.beta1 = ends(0);
  for (int j = 0; j < k; ++j) {
    s.zeta.push_back(ends(2 * j + 1) - ends(2 * j));
    if (j + 1 < k) s.gamma.push_back(ends(2 * j + 2) - ends(2 * j + 1));
  }
  return s;
}

namespace {

Eigen::VectorXd endpoint_speeds(const MultiCornerState& s) {
  const Ks1Convolution H(s.profile());
  const Eigen::VectorXd e = s.endpoints();
  Eigen::VectorXd v(e.size());
  for (Eigen::Index i = 0; i < e.size(); ++i) v(i) = 2.0 * H.value(e(i));
  return v;
}

bool collided(const MultiCornerState& s, std::string* why) {
  auto report = [&](const char* what, std::size_t j, double v) {
    if (why) {
      std::ostringstream os;
      os << what << ' ' << j + 1 << " = " << v << " at t = " << s.t;
      *why = os.str();
    }
    return true;
  };
  for (std::size_t j = 0; j < s.zeta.size(); ++j)
    if (s.zeta[j] <= kCollisionAngle) return report("corner angle", j, s.zeta[j]);
  for (std::size_t j = 0; j < s.gamma.size(); ++j)
    if (s.gamma[j] <= kCollisionAngle) return report("gap", j, s.gamma[j]);
  if (s.closing_gap() <= kCollisionAngle) return report("closing gap", s.gamma.size(), s.closing_gap());
  return false;
}

}  // namespace

EndpointRates endpoint_rhs(const MultiCornerState& s) {
  s.validate();
  EndpointRates r;
  r.endpoints = endpoint_speeds(s);
  const int k = s.corners();
  r.dzeta.resize(k);
  r.dgamma.resize(k - 1);
  for (int j = 0; j < k; ++j) {
    r.dzeta(j) = r.endpoints(2 * j + 1) - r.endpoints(2 * j);
    if (j + 1 < k) r.dgamma(j) = r.endpoints(2 * j + 2) - r.endpoints(2 * j + 1);
  }
  r.dbeta1 = r.endpoints(0);
  return r;
}

ShapeRates closed_form_rhs(const MultiCornerState& s, double C_m, ClosedForm form) {
  const int k = s.corners();
  const auto b = s.betas();
  const auto& z = s.zeta;
  const double q = s.m / 4.0;
  const double ph = kTwoPi / s.m;
  ShapeRates r{Eigen::VectorXd::Zero(k), Eigen::VectorXd::Zero(k - 1)};
  for (int j = 0; j < k; ++j) {
    double sum = 0.0;
    for (int l = 0; l < k; ++l) {
      if (l == j) continue;
      const double X = 2 * (b[j] - b[l]) + z[j] - z[l];
      if (form == ClosedForm::printed) {
        const double term = std::sin(q * z[l]) * std::cos(q * X);
        sum += l < j ? term : -term;
      } else {
        sum -= std::sin(z[l]) * std::sin(X + (l < j ? -ph : ph));
      }
    }
    r.dzeta(j) = C_m * (form == ClosedForm::printed ? std::sin(q * z[j]) : std::sin(z[j])) * sum;
  }
  for (int j = 0; j + 1 < k; ++j) {
    const double g = s.gamma[j];
    double sum = 0.0;
    for (int l = 0; l < k; ++l) {
      const double X = (b[j + 1] - b[l]) + (b[j] - b[l]) + (z[j] - z[l]);
      if (form == ClosedForm::printed) {
        const double term = std::sin(q * z[l]) * std::cos(q * X);
        sum += l <= j ? term : -term;
      } else {
        sum -= std::sin(z[l]) * std::sin(X + (l <= j ? -ph : ph));
      }
    }
    r.dgamma(j) = C_m * (form == ClosedForm::printed ? std::sin(q * g) : std::sin(g)) * sum;
  }
  return r;
}

double kernel_exact_prefactor(int m) { return 2.0 * m * symmetrized_kernel(m, kPi / m) / kPi; }

MultiCornerState probe_configuration(int m, int variant) {
  const double scale = 3.0 / m;
  MultiCornerState s;
  s.m = m;
  if (variant == 0) {
    s.zeta = {0.3 * scale, 0.5 * scale};
    s.gamma = {0.4 * scale};
    s.beta1 = 0.1;
  } else {
    s.zeta = {0.25 * scale, 0.45 * scale};
    s.gamma = {0.6 * scale};
    s.beta1 = -0.2;
  }
  return s;
}

double fit_cm(int m, ClosedForm form, const MultiCornerState& probe) {
  if (probe.m != m) throw InvalidInput("probe symmetry order does not match m");
  const auto ref = endpoint_rhs(probe);
  const auto unit = closed_form_rhs(probe, 1.0, form);
  const double num = unit.dzeta.dot(ref.dzeta) + unit.dgamma.dot(ref.dgamma);
  const double den = unit.dzeta.squaredNorm() + unit.dgamma.squaredNorm();
  if (den == 0.0) throw NumericalFailure("C_m probe is degenerate");
  return num / den;
}

double fitted_cm(int m, ClosedForm form) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, double> cache;
  std::lock_guard<std::mutex> lock(mu);
  const auto key = std::make_pair(m, static_cast<int>(form));
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  const double c = fit_cm(m, form, probe_configuration(m, 0));
  cache[key] = c;
  return c;
}

namespace {

AngleSample sample_of(const MultiCornerState& s) {
  AngleSample a{s.t, s.zeta, s.gamma, s.beta1, 0.0};
  for (double z : s.zeta) a.sum_zeta += z;
  return a;
}

// One RK4 step; returns false if the state is no longer admissible.
bool advance(MultiCornerState& s, double dt, const AngleIntegrateOptions& opt, double C) {
  const double dir = static_cast<double>(opt.direction);
  const int k = s.corners();
  if (opt.rhs == RhsSelector::endpoint) {
    auto f = [&](double t, const Eigen::VectorXd& e) -> Eigen::VectorXd {
      if (!e.allFinite()) return Eigen::VectorXd::Constant(e.size(), std::nan(""));
      const auto st = MultiCornerState::from_endpoints(s.m, e, t);
      if (collided(st, nullptr)) return Eigen::VectorXd::Constant(e.size(), std::nan(""));
      return dir * endpoint_speeds(st);
    };
    const Eigen::VectorXd e = rk4_step(f, s.t, s.endpoints(), dt);
    if (!e.allFinite()) return false;
    s = MultiCornerState::from_endpoints(s.m, e, s.t + dt);
  } else {
    auto pack = [&](const MultiCornerState& st) {
      Eigen::VectorXd y(2 * k - 1);
      for (int j = 0; j < k; ++j) y(j) = st.zeta[j];
      for (int j = 0; j + 1 < k; ++j) y(k + j) = st.gamma[j];
      return y;
    };
    auto unpack = [&](const Eigen::VectorXd& y, double t) {
      MultiCornerState st = s;
      st.t = t;
      for (int j = 0; j < k; ++j) st.zeta[j] = y(j);
      for (int j = 0; j + 1 < k; ++j) st.gamma[j] = y(k + j);
      return st;
    };
    auto f = [&](double t, const Eigen::VectorXd& y) -> Eigen::VectorXd {
      const auto r = closed_form_rhs(unpack(y, t), C, opt.form);
      Eigen::VectorXd d(2 * k - 1);
      d << r.dzeta, r.dgamma;
      return dir * d;
    };
    s = unpack(rk4_step(f, s.t, pack(s), dt), s.t + dt);
  }
  return !collided(s, nullptr);
}

}  // namespace

AngleTrajectory integrate(const MultiCornerState& s0, double dt, double T, const AngleIntegrateOptions& opt) {
  if (!(dt > 0.0) || !(T > 0.0)) throw InvalidInput("integrate needs dt > 0 and T > 0");
  s0.validate();
  const double C = opt.rhs == RhsSelector::closed_form
                       ? (opt.C_m > 0.0 ? opt.C_m : fitted_cm(s0.m, opt.form))
                       : 0.0;
  AngleTrajectory tr;
  MultiCornerState s = s0;
  tr.samples.push_back(sample_of(s));
  const long steps = std::lround(T / dt);
  for (long n = 0; n < steps; ++n) {
    MultiCornerState trial = s;
    if (!advance(trial, dt, opt, C)) {
      // Retry once with two half steps before declaring a collision.
      trial = s;
      const bool ok = advance(trial, 0.5 * dt, opt, C) && advance(trial, 0.5 * dt, opt, C);
      if (!ok) {
        tr.collision = true;
        collided(trial, &tr.diagnostic);
        if (tr.diagnostic.empty()) tr.diagnostic = "endpoint collision near t = " + std::to_string(s.t);
        return tr;
      }
    }
    s = trial;
    s.t = s0.t + (n + 1) * dt;
    tr.samples.push_back(sample_of(s));
  }
  return tr;
}

double rotation_speed(double zeta0, int m) {
  if (m < 3) throw InvalidInput("rotation speed requires m >= 3");
  if (!(zeta0 > 0.0 && zeta0 < kTwoPi / m)) throw InvalidInput("need 0 < zeta0 < 2 pi / m");
  MultiCornerState s;
  s.m = m;
  s.zeta = {zeta0};
  s.beta1 = -0.5 * zeta0;
  return endpoint_rhs(s).dbeta1;
}

void write_angle_csv(std::ostream& os, const AngleTrajectory& tr) {
  if (tr.samples.empty()) return;
  const std::size_t k = tr.samples.front().zeta.size();
  os << "t";
  for (std::size_t j = 0; j < k; ++j) os << ",zeta_" << j + 1;
  for (std::size_t j = 0; j + 1 < k; ++j) os << ",gamma_" << j + 1;
  os << ",beta1,sum_zeta\n";
  os.precision(17);
  for (const auto& a : tr.samples) {
    os << a.t;
    for (double z : a.zeta) os << ',' << z;
    for (double g : a.gamma) os << ',' << g;
    os << ',' << a.beta1 << ',' << a.sum_zeta << '\n';
  }
}

}  // namespace vpatch
