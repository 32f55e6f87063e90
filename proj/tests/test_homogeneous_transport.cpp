#include "vpatch/angle_odes.hpp"
#include "vpatch/homogeneous_transport.hpp"
#include "vpatch/polar_elliptic.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace vpatch;

TEST(Transport, ConstantIsStationaryProfile) {
  const auto tr = evolve_profile(IntervalProfile::full_circle(2.0), 1.0, 0.1);
  ASSERT_FALSE(tr.ordering_violation);
  EXPECT_NEAR(tr.theta.back()(1) - tr.theta.back()(0), tr.theta[0](1) - tr.theta[0](0), 1e-14);
  EXPECT_NEAR(tr.interval_profile(tr.times.size() - 1).measure(), kTwoPi, 1e-12);
  // Rigid rotation at speed 2H = h/2.
  EXPECT_NEAR(tr.theta.back()(0) - tr.theta[0](0), 1.0, 1e-12);
}

TEST(Transport, RejectsLowSymmetry) {
  EXPECT_THROW(evolve_profile(IntervalProfile::sector(0.0, 1.0), 1.0, 0.1), InvalidInput);
  EXPECT_THROW(evolve_profile(FourierProfile::sine_mode(8, 2), 1.0, 0.1), InvalidInput);
  EXPECT_EQ(detect_symmetry(FourierProfile::sine_mode(8, 6)), 6);
}

TEST(Transport, IntervalMatchesAngleOdes) {
  MultiCornerState s;
  s.m = 3;
  s.zeta = {0.3, 0.5};
  s.gamma = {0.4};
  s.beta1 = 0.1;
  const auto ref = integrate(s, 0.01, 2.0);
  ASSERT_FALSE(ref.collision);

  IntervalProfile h = s.profile();
  const auto tr = evolve_profile(h, 2.0, 0.01);
  ASSERT_EQ(tr.times.size(), ref.samples.size());
  const auto& th = tr.theta.back();
  const auto& a = ref.samples.back();
  EXPECT_NEAR(th(1) - th(0), a.zeta[0], 1e-10);
  EXPECT_NEAR(th(3) - th(2), a.zeta[1], 1e-10);
  EXPECT_NEAR(th(2) - th(1), a.gamma[0], 1e-10);
  EXPECT_NEAR(wrap_angle(th(0) - a.beta1), 0.0, 1e-10);
}

TEST(Transport, SmoothSymmetricConservesIntegralAndSup) {
  const auto h0 = FourierProfile::sine_mode(64, 3, 1.0);
  TransportOptions opt;
  opt.characteristics = 512;
  opt.degree = 128;
  const auto tr = evolve_profile(h0, 5.0, 0.02, opt);
  ASSERT_FALSE(tr.ordering_violation) << tr.diagnostic;
  const double I0 = characteristic_integral(tr.theta.front(), tr.value);
  const double I1 = characteristic_integral(tr.theta.back(), tr.value);
  EXPECT_NEAR(I0, 0.0, 1e-10);
  EXPECT_NEAR(I1, I0, 1e-6);
  EXPECT_NEAR(tr.value.cwiseAbs().maxCoeff(), 1.0, 1e-12);
}

TEST(Transport, SingleModeInitialSpeed) {
  // h = sin 3 theta gives H = -sin 3 theta / 5, speed -0.4 sin 3 theta.
  const auto h0 = FourierProfile::sine_mode(16, 3, 1.0);
  TransportOptions opt;
  opt.characteristics = 256;
  opt.degree = 32;
  const double dt = 1e-4;
  const auto tr = evolve_profile(h0, dt, dt, opt);
  const auto& a = tr.theta[0];
  const auto& b = tr.theta[1];
  for (Eigen::Index i = 0; i < a.size(); i += 17)
    EXPECT_NEAR((b(i) - a(i)) / dt, -0.4 * std::sin(3 * a(i)), 1e-5);
}

TEST(Spiral, MeasureChangesAtPredictedRate) {
  // d/dt int h = -8c int H'^2 for the spiral operator.
  FourierProfile h0(8);
  h0.cos_coeffs()(0) = 2.0;
  h0.cos_coeffs()(1) = 0.5;
  h0.sin_coeffs()(3) = 0.3;
  const double c = 0.7;
  const auto H = spiral_invert(h0, c);
  double dissip = 0.0;
  const int n = 4096;
  for (int i = 0; i < n; ++i) {
    const double d = H.d1(-kPi + kTwoPi * i / n);
    dissip += d * d * kTwoPi / n;
  }
  TransportOptions opt;
  opt.characteristics = 1024;
  opt.degree = 64;
  const double dt = 1e-3;
  const auto tr = evolve_spiral(h0, c, 2 * dt, dt, opt);
  const double rate = (characteristic_integral(tr.theta[2], tr.value) -
                       characteristic_integral(tr.theta[0], tr.value)) / (2 * dt);
  EXPECT_NEAR(rate, -8 * c * dissip, 1e-3 * (1 + 8 * c * dissip));
  EXPECT_GT(8 * c * dissip, 1e-3);
}

TEST(Spiral, LargePitchFlattensSpeed) {
  const auto h = IntervalProfile::sector(-0.5, 0.5);
  double prev = 1e300;
  for (double c : {0.5, 2.0, 8.0}) {
    const auto tr = evolve_spiral(h, c, 0.01, 0.01);
    const auto& a = tr.theta[0];
    const auto& b = tr.theta[1];
    const double spread = std::abs((b(1) - a(1)) - (b(0) - a(0))) / 0.01;
    EXPECT_LT(spread, prev);
    prev = spread;
  }
  EXPECT_THROW(evolve_spiral(h, 0.0, 1.0, 0.1), InvalidInput);
}

TEST(Alexander, EqualMassesKeepGaps) {
  AlexanderState s;
  s.pitch = 1.3;
  const int n = 4;
  s.theta.resize(n);
  s.weight = Eigen::VectorXd::Constant(n, 0.7);
  for (int i = 0; i < n; ++i) s.theta(i) = 0.2 + kTwoPi * i / n;
  const auto tr = evolve_alexander(s, 2.0, 0.01);
  ASSERT_FALSE(tr.collision);
  for (const auto& th : tr.theta)
    for (int i = 0; i + 1 < n; ++i) EXPECT_NEAR(th(i + 1) - th(i), kTwoPi / n, 1e-8);
}

TEST(Alexander, SingleMassSpeedFromSeries) {
  AlexanderState s;
  s.pitch = 1.0;
  s.theta = Eigen::VectorXd::Constant(1, 0.0);
  s.weight = Eigen::VectorXd::Constant(1, 1.0);
  // S(0) = 1/4 + 2 sum Re 1/D_k; compare a truncated reference by a longer sum.
  double S = 0.25;
  for (int k = 1; k <= 200000; ++k) S += 2.0 * (1.0 / spiral_denominator(1.0, k)).real();
  EXPECT_NEAR(alexander_speeds(s)(0), 2.0 * S / kTwoPi, 1e-3);
  EXPECT_THROW(evolve_alexander(AlexanderState{}, 1.0, 0.1), InvalidInput);
}
