#include "vpatch/homogeneous_transport.hpp"

#include "vpatch/polar_elliptic.hpp"
#include "vpatch/rk4.hpp"

#include <boost/math/special_functions/fpclassify.hpp>  // pchip.hpp calls isnan unqualified
#include <boost/math/interpolators/pchip.hpp>
#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <functional>
#include <numeric>
#include <sstream>

namespace vpatch {

namespace {

using SpeedFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

bool ordered(const Eigen::VectorXd& th) {
  for (Eigen::Index i = 0; i + 1 < th.size(); ++i)
    if (!(th(i + 1) > th(i))) return false;
  return th.size() < 2 || th(th.size() - 1) - th(0) < kTwoPi;
}

TransportTrajectory run_characteristics(Eigen::VectorXd theta, Eigen::VectorXd value, double T,
                                        double dt, const SpeedFn& speed, bool check_order) {
  if (!(dt > 0.0) || !(T > 0.0)) throw InvalidInput("transport needs dt > 0 and T > 0");
  TransportTrajectory tr;
  tr.value = std::move(value);
  tr.times.push_back(0.0);
  tr.theta.push_back(theta);
  const long steps = std::lround(T / dt);
  auto f = [&](double, const Eigen::VectorXd& th) { return speed(th); };
  for (long n = 0; n < steps; ++n) {
    theta = rk4_step(f, n * dt, theta, dt);
    if (check_order && !ordered(theta)) {
      tr.ordering_violation = true;
      std::ostringstream os;
      os << "characteristics crossed at t = " << (n + 1) * dt;
      tr.diagnostic = os.str();
      return tr;
    }
    tr.times.push_back((n + 1) * dt);
    tr.theta.push_back(theta);
  }
  return tr;
}

// Interval endpoints of the fundamental block as characteristics.
void interval_characteristics(const IntervalProfile& h, Eigen::VectorXd& theta, Eigen::VectorXd& value) {
  const auto n = static_cast<Eigen::Index>(h.pieces.size());
  theta.resize(2 * n);
  value.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    theta(2 * i) = h.pieces[i].start;
    theta(2 * i + 1) = h.pieces[i].end;
    value(i) = h.pieces[i].value;
  }
}

IntervalProfile profile_from(const Eigen::VectorXd& theta, const Eigen::VectorXd& value, int m) {
  IntervalProfile p;
  p.symmetry_order = m;
  for (Eigen::Index i = 0; i < value.size(); ++i) {
    const double s = wrap_angle(theta(2 * i));
    p.pieces.push_back({s, s + theta(2 * i + 1) - theta(2 * i), value(i)});
  }
  return p;
}

// Periodic pchip through (theta_i, h_i), sampled on n uniform points of [-pi, pi),
// then projected to Fourier coefficients up to `degree`.
FourierProfile resample(const Eigen::VectorXd& theta, const Eigen::VectorXd& h, int degree) {
  const Eigen::Index N = theta.size();
  const int pad = 3;
  std::vector<double> x, y;
  x.reserve(N + 2 * pad);
  y.reserve(N + 2 * pad);
  for (int i = N - pad; i < N; ++i) {
    x.push_back(theta(i) - kTwoPi);
    y.push_back(h(i));
  }
  for (Eigen::Index i = 0; i < N; ++i) {
    x.push_back(theta(i));
    y.push_back(h(i));
  }
  for (int i = 0; i < pad; ++i) {
    x.push_back(theta(i) + kTwoPi);
    y.push_back(h(i));
  }
  boost::math::interpolators::pchip<std::vector<double>> interp(std::move(x), std::move(y));
  const int M = 4 * degree;
  std::vector<double> samples(M);
  for (int g = 0; g < M; ++g) {
    double t = -kPi + kTwoPi * g / M;
    while (t < theta(0)) t += kTwoPi;
    while (t >= theta(0) + kTwoPi) t -= kTwoPi;
    samples[g] = interp(t);
  }
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> spec;
  fft.fwd(spec, samples);
  FourierProfile f(degree);
  for (int k = 0; k <= degree; ++k) {
    // Sample k is at -pi + 2 pi g/M, a shift of e^{-ik(-pi)} = (-1)^k.
    const std::complex<double> ck = spec[k] * (k % 2 ? -1.0 : 1.0) * (2.0 / M);
    f.cos_coeffs()(k) = ck.real();
    f.sin_coeffs()(k) = -ck.imag();
  }
  f.sin_coeffs()(0) = 0.0;
  return f;
}

void keep_multiples(FourierProfile& f, int m) {
  if (m <= 1) return;
  for (int k = 1; k <= f.degree(); ++k) {
    if (k % m == 0) continue;
    f.cos_coeffs()(k) = 0.0;
    f.sin_coeffs()(k) = 0.0;
  }
}

Eigen::VectorXd eval_speed(const FourierProfile& H, const Eigen::VectorXd& theta) {
  Eigen::VectorXd v(theta.size());
  for (Eigen::Index i = 0; i < theta.size(); ++i) v(i) = 2.0 * H.derivative(theta(i), 0);
  return v;
}

void smooth_characteristics(const FourierProfile& h0, int n, Eigen::VectorXd& theta, Eigen::VectorXd& value) {
  theta.resize(n);
  value.resize(n);
  for (int i = 0; i < n; ++i) {
    theta(i) = -kPi + kTwoPi * i / n;
    value(i) = h0(theta(i));
  }
}

}  // namespace

IntervalProfile TransportTrajectory::interval_profile(std::size_t n) const {
  return profile_from(theta.at(n), value, symmetry_order);
}

int detect_symmetry(const FourierProfile& h, double tol) {
  int g = 0;
  for (int k = 1; k <= h.degree(); ++k)
    if (std::abs(h.cos_coeffs()(k)) > tol || std::abs(h.sin_coeffs()(k)) > tol) g = std::gcd(g, k);
  return g;
}

TransportTrajectory evolve_profile(const IntervalProfile& h0, double T, double dt) {
  h0.validate();
  if (!h0.is_full_circle() && h0.symmetry_order < 3)
    throw InvalidInput("transport requires h to be m-fold rotationally symmetric on S^1 for some m >= 3");
  Eigen::VectorXd theta, value;
  interval_characteristics(h0, theta, value);
  const int m = h0.symmetry_order;
  const bool full = h0.is_full_circle();
  auto speed = [&](const Eigen::VectorXd& th) -> Eigen::VectorXd {
    if (full) return Eigen::VectorXd::Constant(th.size(), 0.5 * value(0));  // H = h/4
    const Ks1Convolution H(profile_from(th, value, m));
    Eigen::VectorXd v(th.size());
    for (Eigen::Index i = 0; i < th.size(); ++i) v(i) = 2.0 * H.value(th(i));
    return v;
  };
  auto tr = run_characteristics(theta, value, T, dt, speed, false);
  tr.symmetry_order = m;
  return tr;
}

TransportTrajectory evolve_profile(const FourierProfile& h0, double T, double dt, const TransportOptions& opt) {
  const int m = detect_symmetry(h0);
  if (m != 0 && m < 3)
    throw InvalidInput("transport requires h to be m-fold rotationally symmetric on S^1 for some m >= 3");
  Eigen::VectorXd theta, value;
  smooth_characteristics(h0, opt.characteristics, theta, value);
  auto speed = [&](const Eigen::VectorXd& th) {
    auto f = resample(th, value, opt.degree);
    keep_multiples(f, m);
    return eval_speed(invert_angular_laplacian(f).H, th);
  };
  return run_characteristics(theta, value, T, dt, speed, true);
}

TransportTrajectory evolve_spiral(const IntervalProfile& h0, double c, double T, double dt,
                                  const TransportOptions& opt) {
  if (!(c > 0.0)) throw InvalidInput("spiral transport needs pitch c > 0");
  h0.validate();
  Eigen::VectorXd theta, value;
  interval_characteristics(h0, theta, value);
  const int m = h0.symmetry_order;
  auto speed = [&](const Eigen::VectorXd& th) {
    const auto f = fourier_of_intervals(profile_from(th, value, m), opt.degree);
    return eval_speed(spiral_invert(f, c).real, th);
  };
  auto tr = run_characteristics(theta, value, T, dt, speed, false);
  tr.symmetry_order = m;
  return tr;
}

TransportTrajectory evolve_spiral(const FourierProfile& h0, double c, double T, double dt,
                                  const TransportOptions& opt) {
  if (!(c > 0.0)) throw InvalidInput("spiral transport needs pitch c > 0");
  Eigen::VectorXd theta, value;
  smooth_characteristics(h0, opt.characteristics, theta, value);
  auto speed = [&](const Eigen::VectorXd& th) {
    return eval_speed(spiral_invert(resample(th, value, opt.degree), c).real, th);
  };
  return run_characteristics(theta, value, T, dt, speed, true);
}

double characteristic_integral(const Eigen::VectorXd& theta, const Eigen::VectorXd& value) {
  const Eigen::Index n = theta.size();
  double sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double next = i + 1 < n ? theta(i + 1) : theta(0) + kTwoPi;
    sum += 0.5 * (value(i) + value((i + 1) % n)) * (next - theta(i));
  }
  return sum;
}

Eigen::VectorXd alexander_speeds(const AlexanderState& s, int modes) {
  const double c = s.pitch;
  std::vector<std::complex<double>> inv(modes + 1);
  for (int k = 1; k <= modes; ++k) inv[k] = 1.0 / spiral_denominator(c, k);
  const Eigen::Index n = s.theta.size();
  Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double H = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double phi = s.theta(i) - s.theta(j);
      const std::complex<double> step(std::cos(phi), std::sin(phi));
      std::complex<double> e(1.0, 0.0);
      double S = 0.25;
      for (int k = 1; k <= modes; ++k) {
        e *= step;
        S += 2.0 * (e * inv[k]).real();
      }
      H += s.weight(j) / kTwoPi * S;
    }
    v(i) = 2.0 * H;
  }
  return v;
}

AlexanderTrajectory evolve_alexander(const AlexanderState& s0, double T, double dt, int modes) {
  if (!(s0.pitch > 0.0)) throw InvalidInput("Alexander spirals need pitch c > 0");
  if (s0.theta.size() != s0.weight.size() || s0.theta.size() == 0)
    throw InvalidInput("positions and weights must have equal nonzero length");
  if (!(dt > 0.0) || !(T > 0.0)) throw InvalidInput("evolve_alexander needs dt > 0 and T > 0");
  auto min_gap = [](const Eigen::VectorXd& th) {
    double g = kTwoPi;
    for (Eigen::Index i = 0; i < th.size(); ++i)
      for (Eigen::Index j = i + 1; j < th.size(); ++j)
        g = std::min(g, std::abs(wrap_angle(th(i) - th(j))));
    return g;
  };
  if (min_gap(s0.theta) <= 1e-10) throw InvalidInput("point-mass positions must be distinct");
  AlexanderTrajectory tr;
  tr.weight = s0.weight;
  tr.times.push_back(s0.t);
  tr.theta.push_back(s0.theta);
  AlexanderState s = s0;
  auto f = [&](double, const Eigen::VectorXd& th) {
    AlexanderState st = s;
    st.theta = th;
    return alexander_speeds(st, modes);
  };
  const long steps = std::lround(T / dt);
  for (long n = 0; n < steps; ++n) {
    s.theta = rk4_step(f, s.t, s.theta, dt);
    s.t = s0.t + (n + 1) * dt;
    if (min_gap(s.theta) <= 1e-10) {
      tr.collision = true;
      tr.diagnostic = "point masses collided at t = " + std::to_string(s.t);
      return tr;
    }
    tr.times.push_back(s.t);
    tr.theta.push_back(s.theta);
  }
  return tr;
}

void write_characteristics_csv(std::ostream& os, const TransportTrajectory& tr) {
  os << "t";
  if (!tr.theta.empty())
    for (Eigen::Index i = 0; i < tr.theta[0].size(); ++i) os << ",theta_" << i + 1;
  os << '\n';
  os.precision(17);
  for (std::size_t n = 0; n < tr.times.size(); ++n) {
    os << tr.times[n];
    for (Eigen::Index i = 0; i < tr.theta[n].size(); ++i) os << ',' << tr.theta[n](i);
    os << '\n';
  }
}

void write_alexander_csv(std::ostream& os, const AlexanderTrajectory& tr) {
  os << "t,index,theta,weight\n";
  os.precision(17);
  for (std::size_t n = 0; n < tr.times.size(); ++n)
    for (Eigen::Index i = 0; i < tr.theta[n].size(); ++i)
      os << tr.times[n] << ',' << i << ',' << tr.theta[n](i) << ',' << tr.weight(i) << '\n';
}

}  // namespace vpatch
