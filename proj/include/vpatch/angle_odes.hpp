#pragma once

// Corner-angle dynamics of m-fold symmetric sector profiles (m >= 3).
//
// Endpoint route: every interval endpoint moves with speed 2H(theta), H the
// K_S1 convolution of the current profile.
// Closed-form route: the pairwise sums in the corner angles, either as printed
// (sin(m zeta/4), cos(m X/4) factors; exact for m = 4 only) or derived from the
// exact symmetrized kernel K^(m)(theta) = a_m cos(2(theta - pi/m)) on [0, 2pi/m):
//   dzeta_j = -C sin zeta_j sum_{l != j} sin zeta_l sin(2(b_j - b_l) + zeta_j - zeta_l -+ 2pi/m),
// with - for l < j, + for l > j, and C = 2 m a_m / pi.

#include "vpatch/angular_profile.hpp"

#include <Eigen/Dense>

#include <ostream>
#include <string>
#include <vector>

namespace vpatch {

struct MultiCornerState {
  int m = 3;
  std::vector<double> zeta;   // corner angles
  std::vector<double> gamma;  // gaps between consecutive corners, size k - 1
  double beta1 = 0.0;         // lower edge of the first corner
  double t = 0.0;

  int corners() const { return static_cast<int>(zeta.size()); }
  void validate() const;
  /// beta_1..beta_k
  std::vector<double> betas() const;
  /// 2k endpoints beta_1, beta_1 + zeta_1, beta_2, ...
  Eigen::VectorXd endpoints() const;
  /// 2pi/m minus the total angle: the gap closing the fundamental window.
  double closing_gap() const;
  IntervalProfile profile() const;

  static MultiCornerState from_endpoints(int m, const Eigen::VectorXd& ends, double t);
};

struct EndpointRates {
  Eigen::VectorXd endpoints;
  Eigen::VectorXd dzeta;
  Eigen::VectorXd dgamma;
  double dbeta1 = 0.0;
};

EndpointRates endpoint_rhs(const MultiCornerState& s);

enum class ClosedForm { printed, kernel_exact };

struct ShapeRates {
  Eigen::VectorXd dzeta;
  Eigen::VectorXd dgamma;
};

ShapeRates closed_form_rhs(const MultiCornerState& s, double C_m, ClosedForm form = ClosedForm::printed);

/// 2 m a_m / pi with a_m = K^(m)(pi/m).
double kernel_exact_prefactor(int m);

/// Two-corner probe configurations scaled to the window 2pi/m; variant 0 is the
/// fitting probe, variant 1 a distinct test probe.
MultiCornerState probe_configuration(int m, int variant);

/// Least-squares C_m matching closed_form_rhs to endpoint_rhs on one evaluation.
double fit_cm(int m, ClosedForm form, const MultiCornerState& probe);
/// fit_cm on probe_configuration(m, 0), computed once per (m, form).
double fitted_cm(int m, ClosedForm form);

enum class RhsSelector { endpoint, closed_form };

struct AngleIntegrateOptions {
  RhsSelector rhs = RhsSelector::endpoint;
  ClosedForm form = ClosedForm::printed;
  /// <= 0 selects fitted_cm(m, form).
  double C_m = 0.0;
  /// -1 integrates with negated velocities (time reversal).
  int direction = 1;
};

struct AngleSample {
  double t = 0.0;
  std::vector<double> zeta;
  std::vector<double> gamma;
  double beta1 = 0.0;
  double sum_zeta = 0.0;
};

struct AngleTrajectory {
  std::vector<AngleSample> samples;
  bool collision = false;
  std::string diagnostic;
};

/// Collision threshold on every corner angle and gap.
inline constexpr double kCollisionAngle = 1e-10;

AngleTrajectory integrate(const MultiCornerState& s, double dt, double T,
                          const AngleIntegrateOptions& opt = {});

/// Angular speed of a single m-fold symmetric corner of angle zeta0, 2H at its
/// lower edge. The corner moves rigidly, so every edge has this speed.
double rotation_speed(double zeta0, int m);

void write_angle_csv(std::ostream& os, const AngleTrajectory& tr);

}  // namespace vpatch
