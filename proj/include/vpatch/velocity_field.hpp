#pragma once

// Velocity and velocity gradient of bounded patches, three ways: the
// homogeneity formulas, area quadrature of the Biot-Savart law, and the
// near-origin radial expansion.
//
// Area quadrature uses rays from the evaluation point x. With y = x + rho e(psi),
//   u(x)    = -(1/2pi) int e(psi)^perp L(psi) dpsi,    L = sum_chords w (rho_b - rho_a),
//   sym grad u(x) = (1/2pi) int sigma(e) Lg(psi) dpsi, Lg = sum_chords w ln(rho_b / rho_a),
// where sigma(e) = [[sin 2psi, -cos 2psi], [-cos 2psi, -sin 2psi]] has zero mean on
// the circle, so the principal value is exact with rho_a := 1 on the chord
// starting at x.

#include "vpatch/patch_geometry.hpp"
#include "vpatch/polar_elliptic.hpp"
#include "vpatch/quadrature.hpp"
#include "vpatch/types.hpp"

#include <array>
#include <ostream>
#include <vector>

namespace vpatch {

/// u = 2H(theta) x^perp - H'(theta) x, plus the r^2 ln(1/r) G part when the
/// stream profile carries a log mode. Returns 0 at x = 0.
Velocity homogeneous_velocity(const StreamProfile& H, const Point& x);

/// Spiral stream r^2 H(phi), phi = c ln(1/r) + theta:
/// u_r = -r H'(phi), u_theta = r (2H(phi) - c H'(phi)).
Velocity spiral_velocity(const SpiralStreamProfile& H, const Point& x);

/// Central-difference Jacobian [[d1 u1, d2 u1], [d1 u2, d2 u2]] with step h.
template <typename F>
Mat2 fd_gradient(const F& u, const Point& x, double h) {
  Mat2 g;
  for (int j = 0; j < 2; ++j) {
    Point xp = x, xm = x;
    xp(j) += h;
    xm(j) -= h;
    g.col(j) = (u(xp) - u(xm)) / (2 * h);
  }
  return g;
}

Mat2 spiral_velocity_gradient(const SpiralStreamProfile& H, const Point& x, double rel_step = 1e-4);

inline quad::Options default_field_options() { return {1e-11, 1e-11, 40}; }

quad::Result<Velocity> biot_savart_velocity(const PatchGeometry& g, const Point& x,
                                            const quad::Options& opt = default_field_options());

quad::Result<Mat2> velocity_gradient(const PatchGeometry& g, const Point& x,
                                     const quad::Options& opt = default_field_options());

/// Coefficient of ln(1/|x|) in the velocity gradient: [[-2s, 2c], [2c, 2s]].
template <typename Scalar>
Eigen::Matrix<Scalar, 2, 2> sector_log_gradient(Scalar c, Scalar s) {
  Eigen::Matrix<Scalar, 2, 2> m;
  m << -2 * s, 2 * c, 2 * c, 2 * s;
  return m;
}

/// Unit eigenvectors of sector_log_gradient(c, s): stretching (eigenvalue
/// +2 sqrt(c^2+s^2)) first, then compressing. Throws on (0, 0).
std::array<Point, 2> separatrices(double c, double s);

struct RadialExpansion {
  Velocity u0 = Velocity::Zero();
  double Is = 0.0;
  double Ic = 0.0;
  Velocity measured = Velocity::Zero();
  Velocity predicted = Velocity::Zero();
  Velocity residual = Velocity::Zero();
  /// |residual| / (r max|omega|)
  double residual_ratio = 0.0;
  bool converged = true;
};

RadialExpansion radial_expansion(const PatchGeometry& g, const Point& x,
                                 const quad::Options& opt = default_field_options());

/// (4/pi) int_{[2x1,1] x [2x2,1]} y1 y2 / |y|^4 omega(y) dy, inner integral in y2 exact.
quad::Result<double> quadrant_integral(const PatchGeometry& g, const Point& x,
                                       const quad::Options& opt = default_field_options());

/// CSV rows (x1, x2, u1, u2, du11, du12, du21, du22).
void write_field_csv(std::ostream& os, const PatchGeometry& g, const std::vector<Point>& points);

}  // namespace vpatch
