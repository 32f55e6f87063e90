#include "vpatch/polar_elliptic.hpp"

#include <algorithm>
#include <cmath>

namespace vpatch {

StreamProfile invert_angular_laplacian(const FourierProfile& h) {
  StreamProfile out{FourierProfile(h.degree()), second_mode_coefficients(h)};
  for (int k = 0; k <= h.degree(); ++k) {
    if (k == 2) continue;
    const double d = 4.0 - static_cast<double>(k) * k;
    out.H.cos_coeffs()(k) = h.cos_coeffs()(k) / d;
    out.H.sin_coeffs()(k) = h.sin_coeffs()(k) / d;
  }
  return out;
}

double forward_residual(const StreamProfile& H, const FourierProfile& h) {
  const double scale =
      std::max({h.cos_coeffs().cwiseAbs().maxCoeff(), h.sin_coeffs().cwiseAbs().maxCoeff(), 1e-300});
  double worst = 0.0;
  for (int k = 0; k <= h.degree(); ++k) {
    const double d = 4.0 - static_cast<double>(k) * k;
    double ra = d * H.H.cos_coeffs()(k) - h.cos_coeffs()(k);
    double rb = d * H.H.sin_coeffs()(k) - h.sin_coeffs()(k);
    if (k == 2) {
      ra -= 4.0 * H.log_mode.c;
      rb -= 4.0 * H.log_mode.s;
    }
    worst = std::max({worst, std::abs(ra), std::abs(rb)});
  }
  return worst / scale;
}

double ks1_antiderivative(double theta) {
  const double t = wrap_angle(theta);
  const double periods = std::round((theta - t) / kTwoPi);
  const double sgn = t > 0 ? 1.0 : (t < 0 ? -1.0 : 0.0);
  const double p = -0.25 * kPi * (std::cos(2 * t) - 1.0) * sgn + 0.25 * t * std::cos(2 * t) -
                   (3.0 / 16.0) * std::sin(2 * t);
  return p + 0.5 * kPi * periods;
}

KernelFit fit_symmetrized_kernel(int m, int grid) {
  if (m < 3) throw InvalidInput("symmetrized kernel fit needs m >= 3");
  Eigen::MatrixXd X(grid, 2);
  Eigen::VectorXd y(grid);
  const double period = kTwoPi / m;
  for (int i = 0; i < grid; ++i) {
    const double t = period * i / grid;
    X(i, 0) = std::abs(std::sin(m * t / 2));
    X(i, 1) = 1.0;
    y(i) = symmetrized_kernel(m, t);
  }
  const Eigen::Vector2d coef = X.colPivHouseholderQr().solve(y);
  return {coef(0), coef(1), (X * coef - y).cwiseAbs().maxCoeff()};
}

namespace {

void require_ks1_symmetry(const IntervalProfile& h) {
  h.validate();
  if (!h.is_full_circle() && h.symmetry_order < 3)
    throw InvalidInput(
        "K_S1 convolution requires h to be m-fold rotationally symmetric on S^1 for some m >= 3");
}

}  // namespace

Ks1Convolution::Ks1Convolution(const IntervalProfile& h) {
  require_ks1_symmetry(h);
  arcs_ = h.reconstructed();
}

double Ks1Convolution::value(double theta) const {
  double sum = 0.0;
  for (const auto& q : arcs_)
    sum += q.value * (ks1_antiderivative(theta - q.start) - ks1_antiderivative(theta - q.end));
  return sum / kTwoPi;
}

double Ks1Convolution::d1(double theta) const {
  double sum = 0.0;
  for (const auto& q : arcs_) sum += q.value * (ks1_kernel(theta - q.start) - ks1_kernel(theta - q.end));
  return sum / kTwoPi;
}

double Ks1Convolution::d2(double theta) const {
  double sum = 0.0;
  for (const auto& q : arcs_)
    sum += q.value * (ks1_kernel_derivative(theta - q.start) - ks1_kernel_derivative(theta - q.end));
  return sum / kTwoPi;
}

Eigen::VectorXd Ks1Convolution::samples(int n) const {
  Eigen::VectorXd out(n);
  for (int i = 0; i < n; ++i) out(i) = value(-kPi + kTwoPi * i / n);
  return out;
}

Eigen::VectorXd convolve_ks1(const IntervalProfile& h, int n) { return Ks1Convolution(h).samples(n); }

double spiral_min_denominator(double c, int degree) {
  double best = std::abs(spiral_denominator(c, 0));
  for (int k = 1; k <= degree; ++k) best = std::min(best, std::abs(spiral_denominator(c, k)));
  return best;
}

SpiralStreamProfile spiral_invert(const FourierProfile& h, double c) {
  if (!(c >= 0.0) || !std::isfinite(c)) throw InvalidInput("spiral pitch must be finite and >= 0");
  const int n = h.degree();
  if (c == 0.0 && n >= 2 &&
      (std::abs(h.cos_coeffs()(2)) > 1e-14 || std::abs(h.sin_coeffs()(2)) > 1e-14))
    throw InvalidInput("pitch 0 with a nonzero 2-mode degenerates to the logarithmic sector case");
  SpiralStreamProfile out{c, Eigen::VectorXcd::Zero(n + 1), FourierProfile(n)};
  out.modes(0) = 0.5 * h.cos_coeffs()(0) / 4.0;
  out.real.cos_coeffs()(0) = 2.0 * out.modes(0).real();
  for (int k = 1; k <= n; ++k) {
    if (c == 0.0 && k == 2) continue;
    const std::complex<double> hk(0.5 * h.cos_coeffs()(k), -0.5 * h.sin_coeffs()(k));
    const std::complex<double> Hk = hk / spiral_denominator(c, k);
    out.modes(k) = Hk;
    out.real.cos_coeffs()(k) = 2.0 * Hk.real();
    out.real.sin_coeffs()(k) = -2.0 * Hk.imag();
  }
  return out;
}

}  // namespace vpatch
