#include "vpatch/effective_corner.hpp"

#include "vpatch/rk4.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

namespace vpatch {

namespace {

constexpr double kLogStep = 0.005;

// Advances a log-time system dy/ds = fs(tau, y) from tau_from to tau_to.
template <class Y, class F>
Y log_time_advance(const F& fs, Y y, double tau_from, double tau_to) {
  const double s0 = std::log(tau_from);
  const double s1 = std::log(tau_to);
  const int n = std::max(1, static_cast<int>(std::ceil((s1 - s0) / kLogStep)));
  const double h = (s1 - s0) / n;
  auto g = [&](double s, const Y& v) { return fs(std::exp(s), v); };
  for (int i = 0; i < n; ++i) y = rk4_step(g, s0 + i * h, y, h);
  return y;
}

long step_count(double T, double dtau) {
  if (!(dtau > 0.0) || !(T > 0.0)) throw InvalidInput("effective models need T > 0 and dtau > 0");
  return std::lround(T / dtau);
}

// Odd corner in x, where x = A (contracting) or x = pi/2 - A (expanding):
// x' = -sin(2x) M / pi, M = J / tau, with f = 1 - cos 2A = 1 + sign cos 2x.
double odd_f(double x, int sign) { return 1.0 + sign * std::cos(2 * x); }

double odd_angle(double x, int sign) { return sign > 0 ? kPi / 2 - x : x; }

void check_odd_args(double A0, int sign) {
  if (!(A0 > 0.0 && A0 < kPi / 2)) throw InvalidInput("odd corner needs 0 < A0 < pi/2");
  if (sign != 1 && sign != -1) throw InvalidInput("sign must be +1 or -1");
}

// Single corner, integro-differential form: (A, B, p, q) with p = P/tau, q = Q/tau.
Eigen::Vector4d single_rates_tau(double tau, const Eigen::Vector4d& y) {
  const double s2A = std::sin(2 * y(0)), c2A = std::cos(2 * y(0));
  const double s2B = std::sin(2 * y(1)), c2B = std::cos(2 * y(1));
  Eigen::Vector4d d;
  d(0) = -c2B * (s2A * y(2) + c2A * y(3)) / kPi;
  d(1) = -s2B * (c2A * y(2) - s2A * y(3)) / kPi;
  d(2) = (s2B * s2A - y(2)) / tau;
  d(3) = (s2B * c2A - y(3)) / tau;
  return d;
}

SingleCornerSample single_sample(double tau, const Eigen::Vector4d& y) {
  const Eigen::Vector4d d = single_rates_tau(std::max(tau, kEffectiveTau0), y);
  return {tau, y(0), y(1), d(0), d(1), y(2) * tau, y(3) * tau};
}

// Second-order single corner quadratic term 2 Q(v) / (sin 2B cos 2B).
Eigen::Vector2d single_quadratic(double B, double vB, double vA) {
  const double s = std::sin(2 * B), c = std::cos(2 * B);
  return 2.0 / (s * c) * Eigen::Vector2d(c * c * vB * vB - s * s * vA * vA, (c * c - s * s) * vB * vA);
}

}  // namespace

// ---- odd Fourier -------------------------------------------------------------

namespace {

Eigen::VectorXd odd_fourier_operator(const Eigen::VectorXd& g) {
  const Eigen::Index N = g.size();
  Eigen::VectorXd out(N);
  for (Eigen::Index i = 0; i < N; ++i) {
    const double k = static_cast<double>(i + 1);
    const double lower = i > 0 ? (k - 1) * g(i - 1) : 0.0;
    const double upper = i + 1 < N ? (k + 1) * g(i + 1) : 0.0;
    out(i) = lower - upper;
  }
  return out;
}

}  // namespace

Eigen::VectorXd odd_fourier_rates(const OddFourierState& s) {
  if (s.g.size() == 0) throw InvalidInput("odd Fourier state has no modes");
  const double lambda = s.tau > 0.0 ? s.J / (2.0 * s.tau) : 0.5 * s.g(0);
  return lambda * odd_fourier_operator(s.g);
}

OddFourierState odd_fourier_step(const OddFourierState& s, double dtau) {
  if (!(dtau > 0.0) || s.tau < 0.0) throw InvalidInput("odd_fourier_step needs tau >= 0 and dtau > 0");
  const Eigen::Index N = s.g.size();
  OddFourierState out;
  out.tau = s.tau + dtau;
  if (s.tau == 0.0) {
    // y = (g, M = J/tau).
    Eigen::VectorXd y(N + 1);
    y.head(N) = s.g + kEffectiveTau0 * odd_fourier_rates(s);
    y(N) = s.g(0);
    auto fs = [N](double tau, const Eigen::VectorXd& v) {
      Eigen::VectorXd d(N + 1);
      d.head(N) = tau * 0.5 * v(N) * odd_fourier_operator(v.head(N));
      d(N) = v(0) - v(N);
      return d;
    };
    y = log_time_advance(fs, y, kEffectiveTau0, dtau);
    out.g = y.head(N);
    out.J = y(N) * dtau;
    return out;
  }
  Eigen::VectorXd y(N + 1);
  y.head(N) = s.g;
  y(N) = s.J;
  auto ft = [N](double tau, const Eigen::VectorXd& v) {
    Eigen::VectorXd d(N + 1);
    d.head(N) = v(N) / (2.0 * tau) * odd_fourier_operator(v.head(N));
    d(N) = v(0);
    return d;
  };
  y = rk4_step(ft, s.tau, y, dtau);
  out.g = y.head(N);
  out.J = y(N);
  return out;
}

std::vector<OddFourierState> odd_fourier_integrate(const Eigen::VectorXd& g0, double T, double dtau) {
  const long n = step_count(T, dtau);
  std::vector<OddFourierState> out;
  out.reserve(n + 1);
  out.push_back({g0, 0.0, 0.0});
  for (long i = 0; i < n; ++i) {
    OddFourierState next = odd_fourier_step(out.back(), dtau);
    next.tau = (i + 1) * dtau;
    out.push_back(std::move(next));
  }
  return out;
}

Eigen::VectorXd bahouri_chemin_coefficients(int N, double C) {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(N);
  for (int k = 1; k <= N; k += 2) g(k - 1) = C / k;
  return g;
}

Eigen::VectorXd odd_corner_coefficients(int N, double A, double sign) {
  Eigen::VectorXd g(N);
  for (int k = 1; k <= N; ++k) g(k - 1) = sign * 2.0 / (kPi * k) * (1.0 - std::cos(2.0 * k * A));
  return g;
}

double odd_fourier_edge(const Eigen::VectorXd& g, double previous, double level) {
  auto eval = [&](double th) {
    const std::complex<double> step(std::cos(2 * th), std::sin(2 * th));
    std::complex<double> e(1.0, 0.0);
    double sum = 0.0;
    for (Eigen::Index k = 0; k < g.size(); ++k) {
      e *= step;
      sum += g(k) * e.imag();
    }
    return sum - level;
  };
  const int n = 2048;
  const double h = (kPi / 2) / n;
  double best = std::nan("");
  double prev_val = eval(h * 0.5);
  for (int i = 1; i < n; ++i) {
    const double lo = h * (i - 0.5), hi = h * (i + 0.5);
    const double val = eval(hi);
    if ((prev_val < 0) != (val < 0)) {
      double a = lo, b = hi, fa = prev_val;
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (a + b);
        const double fm = eval(mid);
        if ((fm < 0) == (fa < 0)) {
          a = mid;
          fa = fm;
        } else {
          b = mid;
        }
      }
      const double root = 0.5 * (a + b);
      if (std::isnan(best) || std::abs(root - previous) < std::abs(best - previous)) best = root;
    }
    prev_val = val;
  }
  if (std::isnan(best)) throw NumericalFailure("odd Fourier profile has no edge crossing in (0, pi/2)");
  return best;
}

// ---- odd corner ----------------------------------------------------------------

OddCornerTrajectory odd_corner_integrate(double A0, int sign, double T, double dtau) {
  check_odd_args(A0, sign);
  const long n = step_count(T, dtau);
  OddCornerTrajectory tr;
  tr.sign = sign;
  tr.samples.reserve(n + 1);
  tr.samples.push_back({0.0, A0, 0.0});

  const double x0 = sign > 0 ? kPi / 2 - A0 : A0;
  const double f0 = odd_f(x0, sign);
  // y = (x, M = J/tau).
  Eigen::Vector2d y(x0 - kEffectiveTau0 * std::sin(2 * x0) * f0 / kPi, f0);
  auto fs = [sign](double tau, const Eigen::Vector2d& v) {
    return Eigen::Vector2d(-tau * std::sin(2 * v(0)) * v(1) / kPi, odd_f(v(0), sign) - v(1));
  };
  auto ft = [sign](double tau, const Eigen::Vector2d& v) {
    return Eigen::Vector2d(-std::sin(2 * v(0)) * v(1) / kPi, (odd_f(v(0), sign) - v(1)) / tau);
  };
  y = log_time_advance(fs, y, kEffectiveTau0, dtau);
  tr.samples.push_back({dtau, odd_angle(y(0), sign), y(1) * dtau});
  for (long i = 1; i < n; ++i) {
    y = rk4_step(ft, i * dtau, y, dtau);
    const double tau = (i + 1) * dtau;
    tr.samples.push_back({tau, odd_angle(y(0), sign), y(1) * tau});
  }
  return tr;
}

OddCornerTrajectory odd_corner_second_order(double A0, int sign, double T, double dtau) {
  check_odd_args(A0, sign);
  const long n = step_count(T, dtau);
  OddCornerTrajectory tr;
  tr.sign = sign;
  auto source = [sign](double a) { return sign * 2.0 / kPi * std::sin(a) * (1.0 - std::cos(a)); };
  const double a0 = 2 * A0;
  const double adot0 = source(a0);
  tr.samples.push_back({0.0, A0, 0.0});

  // Log time: (a, W = tau a').
  Eigen::Vector2d w(a0 + kEffectiveTau0 * adot0, kEffectiveTau0 * adot0);
  auto fs = [&](double tau, const Eigen::Vector2d& v) {
    return Eigen::Vector2d(v(1), v(1) * v(1) * std::cos(v(0)) / std::sin(v(0)) + tau * source(v(0)));
  };
  auto ft = [&](double tau, const Eigen::Vector2d& v) {
    const double a = v(0), ad = v(1);
    return Eigen::Vector2d(ad, std::cos(a) / std::sin(a) * ad * ad - (ad - source(a)) / tau);
  };
  w = log_time_advance(fs, w, kEffectiveTau0, dtau);
  Eigen::Vector2d y(w(0), w(1) / dtau);
  auto push = [&](double tau, const Eigen::Vector2d& v) {
    if (std::abs(std::sin(v(0))) < 1e-6 || !v.allFinite()) {
      tr.halted = true;
      tr.diagnostic = "sin a below 1e-6 at tau = " + std::to_string(tau) +
                      "; use the integro-differential form";
      return false;
    }
    tr.samples.push_back({tau, 0.5 * v(0), std::nan("")});
    return true;
  };
  if (!push(dtau, y)) return tr;
  for (long i = 1; i < n; ++i) {
    y = rk4_step(ft, i * dtau, y, dtau);
    if (!push((i + 1) * dtau, y)) return tr;
  }
  return tr;
}

ExponentialFit fit_expanding(const OddCornerTrajectory& tr, double tau_lo, double tau_hi) {
  std::vector<double> t, l;
  for (const auto& s : tr.samples) {
    if (s.tau < tau_lo || s.tau > tau_hi) continue;
    const double d = kPi / 2 - s.A;
    if (!(d > 0.0)) continue;
    t.push_back(s.tau);
    l.push_back(std::log(d));
  }
  ExponentialFit fit;
  if (t.size() < 3) return fit;
  Eigen::MatrixXd X(t.size(), 2);
  Eigen::VectorXd Y(t.size());
  fit.certified_rate = INFINITY;
  for (std::size_t i = 0; i < t.size(); ++i) {
    X(i, 0) = 1.0;
    X(i, 1) = t[i];
    Y(i) = l[i];
    fit.certified_rate = std::min(fit.certified_rate, -l[i] / t[i]);
  }
  const Eigen::Vector2d beta = X.colPivHouseholderQr().solve(Y);
  fit.rate = -beta(1);
  const double rms = std::sqrt((X * beta - Y).squaredNorm() / t.size());
  fit.residual = rms / (Y.maxCoeff() - Y.minCoeff());
  return fit;
}

DecayBounds fit_contracting(const OddCornerTrajectory& tr, double slope_lo, double slope_hi) {
  DecayBounds b;
  b.c = INFINITY;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (const auto& s : tr.samples) {
    b.c = std::min(b.c, s.A * (1.0 + s.tau));
    b.C = std::max(b.C, s.A * (1.0 + std::sqrt(s.tau)));
    if (s.tau >= slope_lo && s.tau <= slope_hi && s.A > 0.0) {
      const double x = std::log(s.tau), y = std::log(s.A);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      ++n;
    }
  }
  if (n >= 2) b.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double tend = tr.samples.back().tau;
  for (auto it = tr.samples.rbegin(); it != tr.samples.rend(); ++it)
    if (it->tau <= tend - 1.0 + 1e-9) {
      b.tail_increment = tr.samples.back().J - it->J;
      break;
    }
  return b;
}

// ---- single corner ---------------------------------------------------------------

SingleCornerTrajectory single_corner_integrate(double B0, double T, double dtau) {
  if (!(B0 > 0.0 && B0 < kPi / 4)) throw InvalidInput("single corner needs 0 < B0 < pi/4");
  const long n = step_count(T, dtau);
  SingleCornerTrajectory tr;
  const double dA0 = -std::cos(2 * B0) * std::sin(2 * B0) / kPi;
  Eigen::Vector4d y(0.0, B0, 0.0, std::sin(2 * B0));
  tr.samples.push_back(single_sample(0.0, y));
  y(0) += kEffectiveTau0 * dA0;
  auto fs = [](double tau, const Eigen::Vector4d& v) -> Eigen::Vector4d {
    Eigen::Vector4d d = single_rates_tau(tau, v);
    d.head<2>() *= tau;
    d.tail<2>() *= tau;
    return d;
  };
  y = log_time_advance(fs, y, kEffectiveTau0, dtau);
  for (long i = 0; i < n; ++i) {
    if (i > 0) y = rk4_step(single_rates_tau, i * dtau, y, dtau);
    const double tau = (i + 1) * dtau;
    if (!y.allFinite() || y(1) <= 1e-8) {
      tr.asymptote = true;
      tr.diagnostic = "B reached 1e-8 at tau = " + std::to_string(tau);
      return tr;
    }
    tr.samples.push_back(single_sample(tau, y));
  }
  return tr;
}

SingleCornerTrajectory single_corner_second_order(double B0, double T, double dtau) {
  if (!(B0 > 0.0 && B0 < kPi / 4)) throw InvalidInput("single corner needs 0 < B0 < pi/4");
  const long n = step_count(T, dtau);
  SingleCornerTrajectory tr;
  const double nan = std::nan("");
  const double dA0 = -std::cos(2 * B0) * std::sin(2 * B0) / kPi;
  tr.samples.push_back({0.0, 0.0, B0, dA0, 0.0, nan, nan});

  // Log time: (B, A, V_B = tau B', V_A = tau A').
  Eigen::Vector4d w(B0, kEffectiveTau0 * dA0, 0.0, kEffectiveTau0 * dA0);
  auto fs = [](double tau, const Eigen::Vector4d& v) {
    const Eigen::Vector2d q = single_quadratic(v(0), v(2), v(3));
    const double cs = std::cos(2 * v(0)) * std::sin(2 * v(0));
    return Eigen::Vector4d(v(2), v(3), q(0), -tau * cs / kPi + q(1));
  };
  // Tau: (B, A, B', A').
  auto ft = [](double tau, const Eigen::Vector4d& v) {
    const Eigen::Vector2d q = single_quadratic(v(0), v(2), v(3));
    const double cs = std::cos(2 * v(0)) * std::sin(2 * v(0));
    return Eigen::Vector4d(v(2), v(3), -v(2) / tau + q(0), (-v(3) - cs / kPi) / tau + q(1));
  };
  w = log_time_advance(fs, w, kEffectiveTau0, dtau);
  Eigen::Vector4d y(w(0), w(1), w(2) / dtau, w(3) / dtau);
  for (long i = 0; i < n; ++i) {
    if (i > 0) y = rk4_step(ft, i * dtau, y, dtau);
    const double tau = (i + 1) * dtau;
    if (!y.allFinite() || std::abs(std::sin(2 * y(0)) * std::cos(2 * y(0))) < 1e-6) {
      tr.halted = true;
      tr.diagnostic = "sin 2B cos 2B below 1e-6 at tau = " + std::to_string(tau) +
                      "; use the integro-differential form";
      return tr;
    }
    tr.samples.push_back({tau, y(1), y(0), y(3), y(2), nan, nan});
  }
  return tr;
}

CornerAsymptote corner_asymptote(const SingleCornerTrajectory& tr) {
  CornerAsymptote out;
  if (tr.samples.empty()) return out;
  // A approaches its limit algebraically in tau; Aitken extrapolation on
  // tau_end/4, tau_end/2, tau_end removes the leading power.
  const double tend = tr.samples.back().tau;
  auto at = [&](double tau) {
    const auto it = std::lower_bound(tr.samples.begin(), tr.samples.end(), tau,
                                     [](const SingleCornerSample& s, double t) { return s.tau < t; });
    return it == tr.samples.end() ? tr.samples.back().A : it->A;
  };
  const double a0 = at(tend / 4), a1 = at(tend / 2), a2 = tr.samples.back().A;
  const double denom = (a2 - a1) - (a1 - a0);
  out.A_inf = std::abs(denom) > 1e-300 ? a2 - (a2 - a1) * (a2 - a1) / denom : a2;
  for (const auto& s : tr.samples)
    if (s.B < 1e-3 && std::abs(s.A - out.A_inf) < 1e-4) {
      out.tau = s.tau;
      break;
    }
  return out;
}

SignStructure single_corner_sign_structure(const SingleCornerTrajectory& tr) {
  SignStructure out;
  for (const auto& s : tr.samples) {
    if (s.A < -kPi / 4 || s.A > 0.0) break;
    out.window = s.tau;
    out.A_nonincreasing = out.A_nonincreasing && s.dA <= 0.0;
    out.B_nonincreasing = out.B_nonincreasing && s.dB <= 0.0;
    out.B_nondecreasing = out.B_nondecreasing && s.dB >= 0.0;
  }
  return out;
}

void write_effective_csv(std::ostream& os, const OddCornerTrajectory& tr) {
  os << "tau,A,J\n";
  os.precision(17);
  for (const auto& s : tr.samples) os << s.tau << ',' << s.A << ',' << s.J << '\n';
}

void write_effective_csv(std::ostream& os, const SingleCornerTrajectory& tr) {
  os << "tau,A,B,dA,dB,P,Q\n";
  os.precision(17);
  for (const auto& s : tr.samples)
    os << s.tau << ',' << s.A << ',' << s.B << ',' << s.dA << ',' << s.dB << ',' << s.P << ',' << s.Q << '\n';
}

}  // namespace vpatch
