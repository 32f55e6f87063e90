#include "vpatch/velocity_field.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace vpatch;

namespace {

PatchGeometry unit_disc() { return PatchGeometry(SectorStack::disc(1.0)); }

PatchGeometry pentagon() {
  PolygonPatch p;
  p.loops.push_back({{Point(0.1, -0.3), Point(0.9, 0.0), Point(0.7, 0.6), Point(0.0, 0.8), Point(-0.4, 0.1)},
                     1.0});
  return PatchGeometry(p);
}

double off_diagonal_log_coefficient(const PatchGeometry& g, double r_hi, double r_lo) {
  const double a = velocity_gradient(g, Point(r_hi, 0.0)).value(0, 1);
  const double b = velocity_gradient(g, Point(r_lo, 0.0)).value(0, 1);
  return (b - a) / std::log(r_hi / r_lo);
}

}  // namespace

TEST(HomogeneousVelocity, DiscInterior) {
  const auto H = invert_angular_laplacian(FourierProfile::cosine_mode(4, 0));
  const Point x(0.3, -0.2);
  EXPECT_LT((homogeneous_velocity(H, x) - 0.5 * perp(x)).norm(), 1e-15);
  EXPECT_EQ(homogeneous_velocity(H, Point::Zero()).norm(), 0.0);
}

TEST(HomogeneousVelocity, SineThree) {
  const auto H = invert_angular_laplacian(FourierProfile::sine_mode(4, 3));
  const auto u = homogeneous_velocity(H, Point(1.0, 0.0));
  EXPECT_NEAR(u(0), 0.6, 1e-15);
  EXPECT_NEAR(u(1), 0.0, 1e-15);
}

TEST(HomogeneousVelocity, RadialProfileHasNoRadialVelocity) {
  const auto H = invert_angular_laplacian(FourierProfile::cosine_mode(4, 0, 3.0));
  for (double t : {0.1, 1.0, 2.0}) {
    const Point x(std::cos(t), std::sin(t));
    EXPECT_NEAR(homogeneous_velocity(H, 0.4 * x).dot(x), 0.0, 1e-15);
  }
}

TEST(SpiralVelocity, ConstantProfile) {
  const auto H = spiral_invert(FourierProfile::cosine_mode(8, 0), 3.0);
  const Point x(0.2, 0.1);
  EXPECT_LT((spiral_velocity(H, x) - 0.5 * perp(x)).norm(), 1e-15);
}

TEST(SpiralVelocity, IsStreamFunctionGradient) {
  const auto h = fourier_of_intervals(IntervalProfile::sector(-0.4, 0.4), 64);
  const double c = 2.0;
  const auto H = spiral_invert(h, c);
  auto psi = [&](const Point& y) {
    const double r = y.norm();
    return r * r * H.value(c * std::log(1 / r) + std::atan2(y(1), y(0)));
  };
  const Point x(0.03, 0.02);
  const double e = 1e-7;
  const Velocity fd((psi(x - Point(0, e)) - psi(x + Point(0, e))) / (2 * e),
                    (psi(x + Point(e, 0)) - psi(x - Point(e, 0))) / (2 * e));
  EXPECT_LT((spiral_velocity(H, x) - fd).norm(), 1e-7);
}

TEST(BiotSavart, DiscInsideAndOutside) {
  const auto g = unit_disc();
  const Point a(0.3, 0.4);
  const auto ua = biot_savart_velocity(g, a);
  EXPECT_TRUE(ua.converged);
  EXPECT_LT((ua.value - 0.5 * perp(a)).norm(), 1e-9);
  const Point b(2.0 * std::cos(0.7), 2.0 * std::sin(0.7));
  EXPECT_LT((biot_savart_velocity(g, b).value - perp(b) / (2 * b.squaredNorm())).norm(), 1e-9);
}

TEST(BiotSavart, MatchesHomogeneousNearOriginForSymmetricStack) {
  const auto prof = symmetrize(IntervalProfile::sector(-0.3, 0.3), 3);
  const PatchGeometry g(SectorStack::from_profile(prof, 0.0, 1.0));
  const auto H = invert_angular_laplacian(fourier_of_intervals(prof, 512));
  double worst = 0.0;
  for (double r : {1e-4, 1e-3, 1e-2, 1e-1}) {
    const Point x(r * std::cos(0.5), r * std::sin(0.5));
    const auto diff = biot_savart_velocity(g, x).value - homogeneous_velocity(H, x);
    worst = std::max(worst, diff.norm() / r);
  }
  EXPECT_LT(worst, 1.0);
}

TEST(VelocityGradient, DiscRigidRotation) {
  const auto du = velocity_gradient(unit_disc(), Point(0.2, -0.5));
  Mat2 expected;
  expected << 0, -0.5, 0.5, 0;
  EXPECT_LT((du.value - expected).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(VelocityGradient, MatchesFiniteDifferencesOfVelocity) {
  const auto g = pentagon();
  for (const Point& x : {Point(0.3, 0.2), Point(1.2, 0.4), Point(-0.5, -0.2)}) {
    const auto du = velocity_gradient(g, x).value;
    const Mat2 fd = fd_gradient([&](const Point& y) { return biot_savart_velocity(g, y).value; }, x, 1e-5);
    EXPECT_LT((du - fd).cwiseAbs().maxCoeff(), 1e-5) << x.transpose();
    EXPECT_LT(std::abs(fd.trace()), 1e-4);
    EXPECT_NEAR(du(1, 0) - du(0, 1), g.vorticity_at(x), 1e-9);
  }
}

TEST(VelocityGradient, SectorLogCoefficient) {
  for (double t0 : {kPi / 12, kPi / 8, kPi / 6}) {
    const auto prof = IntervalProfile::sector(-t0, t0);
    const PatchGeometry g(SectorStack::from_profile(prof, 0.0, 1.0));
    const auto cs = second_mode_coefficients(prof);
    const double fitted = off_diagonal_log_coefficient(g, 1e-3, 1e-4);
    const double expected = sector_log_gradient(cs.c, cs.s)(0, 1);
    EXPECT_NEAR(fitted / expected, 1.0, 0.02) << t0;
  }
}

TEST(VelocityGradient, FourFoldSymmetryKillsLog) {
  const auto prof = symmetrize(IntervalProfile::sector(-kPi / 8, kPi / 8), 4);
  const PatchGeometry g(SectorStack::from_profile(prof, 0.0, 1.0));
  EXPECT_LT(std::abs(off_diagonal_log_coefficient(g, 1e-2, 1e-4)), 1e-3);
}

TEST(SectorLogGradient, Formula) {
  const double c = std::sqrt(2.0) / (8 * kPi);
  const Mat2 m = sector_log_gradient(c, 0.0);
  EXPECT_NEAR(m(0, 1), std::sqrt(2.0) / (4 * kPi), 1e-16);
  EXPECT_NEAR(m(1, 0), std::sqrt(2.0) / (4 * kPi), 1e-16);
  EXPECT_EQ(m(0, 0), 0.0);
  EXPECT_TRUE(sector_log_gradient(0.0, 0.0).isZero());
}

TEST(Separatrices, DiagonalsAndAxes) {
  const auto d = separatrices(0.3, 0.0);
  EXPECT_NEAR(std::abs(d[0](0)), std::sqrt(0.5), 1e-15);
  EXPECT_NEAR(std::abs(d[0](1)), std::sqrt(0.5), 1e-15);
  const auto a = separatrices(0.0, 0.2);
  EXPECT_NEAR(std::abs(a[0](1)), 1.0, 1e-15);
  EXPECT_NEAR(std::abs(a[1](0)), 1.0, 1e-15);
  EXPECT_THROW(separatrices(0.0, 0.0), InvalidInput);
  for (int i = 1; i < 20; ++i) {
    const double c = std::sin(1.3 * i);
    const double s = std::cos(2.1 * i);
    const auto v = separatrices(c, s);
    EXPECT_LT(std::abs(v[0].dot(v[1])), 1e-12);
    const Mat2 m = sector_log_gradient(c, s);
    EXPECT_NEAR((m * v[0]).dot(v[0]), 2 * std::hypot(c, s), 1e-12);
  }
}

TEST(RadialExpansion, SectorIntegrals) {
  const double t0 = 0.4;
  const PatchGeometry g(SectorStack::from_profile(IntervalProfile::sector(-t0, t0), 0.0, 1.0));
  for (double r : {1e-4, 1e-2}) {
    const auto re = radial_expansion(g, Point(0.0, r));
    EXPECT_NEAR(re.Ic, std::sin(2 * t0) * std::log(1 / r), 1e-6);
    EXPECT_NEAR(re.Is, 0.0, 1e-9);
  }
}

TEST(RadialExpansion, RadialVorticity) {
  const PatchGeometry g(SectorStack{{{-kPi, kPi, 0.2, 0.7, 1.0}}});
  const auto re = radial_expansion(g, Point(0.05, 0.02));
  EXPECT_LT(std::abs(re.Is) + std::abs(re.Ic) + re.u0.norm(), 1e-10);
  EXPECT_LT(re.measured.norm(), 1e-10);
}

TEST(RadialExpansion, ResidualBoundedForTwoFoldSector) {
  const PatchGeometry g(
      SectorStack::from_profile(symmetrize(IntervalProfile::sector(-0.5, 0.5), 2), 0.0, 1.0));
  double worst = 0.0;
  for (double r = 1e-5; r <= 0.11; r *= 10) {
    const auto re = radial_expansion(g, Point(r * std::cos(1.0), r * std::sin(1.0)));
    worst = std::max(worst, re.residual_ratio);
  }
  EXPECT_LT(worst, 2.0);
}

TEST(RadialExpansion, NonSymmetricProfileKeepsOriginVelocity) {
  IntervalProfile h;
  h.pieces = {{-2.5, -1.9, 1.0}, {-0.3, 0.5, 1.0}, {1.2, 2.2, 0.6}};
  const PatchGeometry g(SectorStack::from_profile(h, 0.0, 1.0));
  const auto re = radial_expansion(g, Point(1e-5 * std::cos(1.0), 1e-5 * std::sin(1.0)));
  EXPECT_GT(re.u0.norm(), 0.05);
  EXPECT_LT((re.u0 - biot_savart_velocity(g, Point(1e-9, 0.0)).value).norm(), 1e-7);
  EXPECT_LT(re.residual_ratio, 1.0);
}

TEST(QuadrantIntegral, SquareOracle) {
  PolygonPatch p;
  p.loops.push_back({{Point(0.5, 0.5), Point(1, 0.5), Point(1, 1), Point(0.5, 1)}, 1.0});
  const auto q = quadrant_integral(PatchGeometry(p), Point(0.125, 0.125));
  EXPECT_NEAR(q.value, 2.0 / kPi * std::log(1.25), 1e-8);
}

TEST(QuadrantIntegral, ZeroVorticity) {
  PolygonPatch p;
  p.loops.push_back({{Point(0.5, 0.5), Point(1, 0.5), Point(1, 1)}, 0.0});
  EXPECT_EQ(quadrant_integral(PatchGeometry(p), Point(0.1, 0.2)).value, 0.0);
}

TEST(QuadrantIntegral, TriangleGrowsLogarithmically) {
  PolygonPatch p;
  p.loops.push_back({{Point(0, 0), Point(1, 0), Point(1, 1)}, 1.0});
  const PatchGeometry g(p);
  std::vector<double> v;
  for (double a : {1e-2, 1e-3, 1e-4}) v.push_back(quadrant_integral(g, Point(a, a)).value);
  const double s1 = (v[1] - v[0]) / std::log(10.0);
  const double s2 = (v[2] - v[1]) / std::log(10.0);
  EXPECT_GT(s1, 0.0);
  EXPECT_NEAR(s1 / s2, 1.0, 0.05);
}
