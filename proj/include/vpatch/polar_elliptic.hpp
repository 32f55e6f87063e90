#pragma once

// Angular elliptic problems behind the polar inverse Laplacian.
//
// Sector ansatz: Delta^{-1} h = r^2 H(theta) + r^2 ln(1/r) G(theta) with
//   4H + H'' - 4G = h,  G = c cos 2theta + s sin 2theta,
// (c, s) the second-mode pair of h and the +-2 modes of H set to zero.
// Spiral ansatz: Delta^{-1} h(c ln(1/r) + theta) = r^2 H(c ln(1/r) + theta) with
//   (1 + c^2) H'' - 4c H' + 4H = h.

#include "vpatch/angular_profile.hpp"

#include <Eigen/Dense>

#include <complex>
#include <ostream>
#include <vector>

namespace vpatch {

struct StreamProfile {
  FourierProfile H;
  LogMode log_mode;

  double value(double theta) const { return H.derivative(theta, 0); }
  double d1(double theta) const { return H.derivative(theta, 1); }
  double d2(double theta) const { return H.derivative(theta, 2); }
  double G(double theta) const {
    return log_mode.c * std::cos(2 * theta) + log_mode.s * std::sin(2 * theta);
  }
  double dG(double theta) const {
    return 2 * (log_mode.s * std::cos(2 * theta) - log_mode.c * std::sin(2 * theta));
  }
};

StreamProfile invert_angular_laplacian(const FourierProfile& h);

/// Max over modes of |forward operator applied to H (minus 4G) - h_k|, relative
/// to max |h_k|.
double forward_residual(const StreamProfile& H, const FourierProfile& h);

/// Circle kernel K(theta) = (pi/2) sin 2theta sgn theta - (1/2) theta sin 2theta
/// - (1/8) cos 2theta, theta reduced to [-pi, pi).
template <typename Scalar>
Scalar ks1_kernel(Scalar theta) {
  using std::cos;
  using std::sin;
  const Scalar t = wrap_angle(theta);
  const Scalar sgn = t > Scalar(0) ? Scalar(1) : (t < Scalar(0) ? Scalar(-1) : Scalar(0));
  return Scalar(kPi / 2) * sin(2 * t) * sgn - Scalar(0.5) * t * sin(2 * t) -
         Scalar(0.125) * cos(2 * t);
}

/// K'(theta); one-sided at the kink theta = 0 (takes the right limit).
template <typename Scalar>
Scalar ks1_kernel_derivative(Scalar theta) {
  using std::cos;
  using std::sin;
  const Scalar t = wrap_angle(theta);
  const Scalar sgn = t >= Scalar(0) ? Scalar(1) : Scalar(-1);
  return Scalar(kPi) * cos(2 * t) * sgn - t * cos(2 * t) - Scalar(0.25) * sin(2 * t);
}

/// Antiderivative of K, continuous on the real line; grows by pi/2 per period.
double ks1_antiderivative(double theta);

/// (1/m) sum_j K(theta + 2 pi j/m). Exact sum, no fitted constants.
template <typename Scalar>
Scalar symmetrized_kernel(int m, Scalar theta) {
  Scalar sum(0);
  for (int j = 0; j < m; ++j) sum += ks1_kernel(Scalar(theta + Scalar(kTwoPi * j / m)));
  return sum / Scalar(m);
}

/// Least-squares fit K^(m) ~ c1 |sin(m theta/2)| + c2 on a uniform grid.
struct KernelFit {
  double c1 = 0.0;
  double c2 = 0.0;
  double max_residual = 0.0;
};
KernelFit fit_symmetrized_kernel(int m, int grid = 4096);

/// H = (1/2 pi) int K(theta - theta') h(theta') dtheta' for an interval profile,
/// by exact antiderivatives. Requires m-fold symmetry with m >= 3 (or a full circle).
class Ks1Convolution {
 public:
  explicit Ks1Convolution(const IntervalProfile& h);

  double value(double theta) const;
  double d1(double theta) const;
  /// Right limit at interval endpoints.
  double d2(double theta) const;

  Eigen::VectorXd samples(int n) const;

 private:
  std::vector<IntervalPiece> arcs_;
};

Eigen::VectorXd convolve_ks1(const IntervalProfile& h, int n);

struct SpiralStreamProfile {
  double pitch = 0.0;
  /// Complex modes H_k for k = 0..N; H = H_0 + 2 Re sum_k H_k e^{ik theta}.
  Eigen::VectorXcd modes;
  FourierProfile real;

  double value(double theta) const { return real.derivative(theta, 0); }
  double d1(double theta) const { return real.derivative(theta, 1); }
  double d2(double theta) const { return real.derivative(theta, 2); }
};

/// Mode denominator 4 - 4cik - (1 + c^2) k^2.
inline std::complex<double> spiral_denominator(double c, int k) {
  return {4.0 - (1.0 + c * c) * k * k, -4.0 * c * k};
}

double spiral_min_denominator(double c, int degree);

SpiralStreamProfile spiral_invert(const FourierProfile& h, double c);

/// CSV rows (theta, H, H', H'') on n uniform points of [-pi, pi).
template <typename Profile>
void write_stream_csv(std::ostream& os, const Profile& H, int n) {
  os << "theta,H,dH,d2H\n";
  os.precision(17);
  for (int i = 0; i < n; ++i) {
    const double t = -kPi + kTwoPi * i / n;
    os << t << ',' << H.value(t) << ',' << H.d1(t) << ',' << H.d2(t) << '\n';
  }
}

}  // namespace vpatch
