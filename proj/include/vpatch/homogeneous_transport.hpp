#pragma once

// Transport of 0-homogeneous vorticity on the circle,
//   h_t + 2H h_theta = 0,
// with H from the K_S1 convolution (sector case, m >= 3) or from the spiral
// operator (1 + c^2) H'' - 4c H' + 4H = h. Values ride on characteristics.

#include "vpatch/angular_profile.hpp"

#include <Eigen/Dense>

#include <ostream>
#include <string>
#include <vector>

namespace vpatch {

struct CharacteristicGrid {
  Eigen::VectorXd theta;  // increasing, spanning less than one turn
  Eigen::VectorXd value;  // constant in time
  double t = 0.0;
};

struct TransportOptions {
  /// Characteristics for smooth data.
  int characteristics = 1024;
  /// Fourier degree of the elliptic solve (smooth data and spiral intervals).
  int degree = 512;
};

struct TransportTrajectory {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> theta;
  Eigen::VectorXd value;
  /// Interval data only: symmetry order and piece layout of the fundamental block.
  int symmetry_order = 1;
  bool ordering_violation = false;
  std::string diagnostic;

  /// Interval data: the profile at sample n.
  IntervalProfile interval_profile(std::size_t n) const;
};

/// Largest m such that every nonzero coefficient index is a multiple of m;
/// 0 for a constant profile.
int detect_symmetry(const FourierProfile& h, double tol = 1e-12);

/// Interval data: characteristics are the piece endpoints, H by the exact kernel.
TransportTrajectory evolve_profile(const IntervalProfile& h0, double T, double dt);

/// Smooth data: characteristics resampled by periodic monotone cubic
/// interpolation for the Fourier elliptic solve at every stage.
TransportTrajectory evolve_profile(const FourierProfile& h0, double T, double dt,
                                   const TransportOptions& opt = {});

TransportTrajectory evolve_spiral(const IntervalProfile& h0, double c, double T, double dt,
                                  const TransportOptions& opt = {});
TransportTrajectory evolve_spiral(const FourierProfile& h0, double c, double T, double dt,
                                  const TransportOptions& opt = {});

/// Trapezoid integral of the carried values over the characteristic angles.
double characteristic_integral(const Eigen::VectorXd& theta, const Eigen::VectorXd& value);

struct AlexanderState {
  Eigen::VectorXd theta;
  Eigen::VectorXd weight;
  double pitch = 1.0;
  double t = 0.0;
};

struct AlexanderTrajectory {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> theta;
  Eigen::VectorXd weight;
  bool collision = false;
  std::string diagnostic;
};

inline constexpr int kAlexanderModes = 512;

/// 2H at the point masses, H = sum_j (w_j/2pi) S(theta - theta_j),
/// S(phi) = sum_{|k| <= N} e^{ik phi} / (4 - 4cik - (1 + c^2) k^2).
Eigen::VectorXd alexander_speeds(const AlexanderState& s, int modes = kAlexanderModes);

AlexanderTrajectory evolve_alexander(const AlexanderState& s, double T, double dt,
                                     int modes = kAlexanderModes);

void write_characteristics_csv(std::ostream& os, const TransportTrajectory& tr);
void write_alexander_csv(std::ostream& os, const AlexanderTrajectory& tr);

}  // namespace vpatch
