#pragma once

// Angular vorticity profiles h(theta) on the circle, as disjoint value
// intervals or as a truncated Fourier series
//   h = a_0/2 + sum_k a_k cos(k theta) + b_k sin(k theta),  a_0 = (1/pi) int h.

#include "vpatch/types.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <vector>

namespace vpatch {

struct IntervalPiece {
  double start = 0.0;  // in [-pi, pi)
  double end = 0.0;    // end > start
  double value = 1.0;
};

/// Union of value intervals. With symmetry_order m > 1 the stored pieces are
/// one fundamental block; the profile is their union under rotations by 2 pi j/m.
struct IntervalProfile {
  std::vector<IntervalPiece> pieces;
  int symmetry_order = 1;

  /// Throws InvalidInput on malformed pieces or on overlap (touching included)
  /// after reconstruction.
  void validate() const;

  /// All arcs after applying the rotations, starts wrapped to [-pi, pi).
  std::vector<IntervalPiece> reconstructed() const;

  double measure() const;
  double value_at(double theta) const;

  /// A single piece of length 2 pi: invariant under every rotation.
  bool is_full_circle() const;

  static IntervalProfile full_circle(double value = 1.0);
  static IntervalProfile sector(double start, double end, double value = 1.0);
};

class FourierProfile {
 public:
  FourierProfile() = default;
  explicit FourierProfile(int degree);
  FourierProfile(Eigen::VectorXd cos_coeffs, Eigen::VectorXd sin_coeffs);

  int degree() const { return static_cast<int>(a_.size()) - 1; }

  /// a(0..N); a(0) carries the 1/2 convention.
  const Eigen::VectorXd& cos_coeffs() const { return a_; }
  /// b(0..N); b(0) is always 0.
  const Eigen::VectorXd& sin_coeffs() const { return b_; }
  Eigen::VectorXd& cos_coeffs() { return a_; }
  Eigen::VectorXd& sin_coeffs() { return b_; }

  double operator()(double theta) const { return derivative(theta, 0); }
  /// order-th derivative by term-wise differentiation.
  double derivative(double theta, int order) const;

  static FourierProfile sine_mode(int degree, int k, double amplitude = 1.0);
  static FourierProfile cosine_mode(int degree, int k, double amplitude = 1.0);

 private:
  Eigen::VectorXd a_;
  Eigen::VectorXd b_;
};

/// Second-mode pair (c, s) = -(1/4 pi) int h (cos 2theta, sin 2theta).
/// The minus sign makes sector_log_gradient(c, s) the coefficient of
/// ln(1/|x|) in the Biot-Savart velocity gradient.
struct LogMode {
  double c = 0.0;
  double s = 0.0;
};

IntervalProfile symmetrize(const IntervalProfile& p, int m);

/// Closed-form coefficients, summed arc by arc over the reconstructed profile.
FourierProfile fourier_of_intervals(const IntervalProfile& p, int degree);

LogMode second_mode_coefficients(const IntervalProfile& p);
LogMode second_mode_coefficients(const FourierProfile& h);

void to_json(nlohmann::json& j, const IntervalProfile& p);
void from_json(const nlohmann::json& j, IntervalProfile& p);

}  // namespace vpatch
