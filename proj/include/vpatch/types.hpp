#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace vpatch {

using Point = Eigen::Vector2d;
using Velocity = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Invalid input to an operation (violated precondition, malformed config).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical procedure did not reach its target accuracy.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Reduce an angle to [-pi, pi).
template <typename Scalar>
Scalar wrap_angle(Scalar theta) {
  using std::floor;
  const Scalar two_pi = Scalar(kTwoPi);
  Scalar r = theta - two_pi * floor((theta + Scalar(kPi)) / two_pi);
  if (r >= Scalar(kPi)) r -= two_pi;
  return r;
}

/// Counterclockwise perpendicular (-v2, v1).
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, 2, 1> perp(const Eigen::MatrixBase<Derived>& v) {
  return {-v(1), v(0)};
}

template <typename Scalar>
Eigen::Matrix<Scalar, 2, 2> rotation(Scalar angle) {
  using std::cos;
  using std::sin;
  Eigen::Matrix<Scalar, 2, 2> r;
  r << cos(angle), -sin(angle), sin(angle), cos(angle);
  return r;
}

inline double cross2(const Point& a, const Point& b) { return a(0) * b(1) - a(1) * b(0); }

}  // namespace vpatch
