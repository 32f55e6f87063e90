#include "vpatch/angle_odes.hpp"
#include "vpatch/polar_elliptic.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace vpatch;

namespace {

MultiCornerState three_corners() {
  MultiCornerState s;
  s.m = 3;
  s.zeta = {0.2, 0.35, 0.15};
  s.gamma = {0.3, 0.25};
  s.beta1 = 0.4;
  return s;
}

double sup_shape_gap(const AngleTrajectory& a, const AngleTrajectory& b) {
  double worst = 0.0;
  for (std::size_t n = 0; n < std::min(a.samples.size(), b.samples.size()); ++n) {
    for (std::size_t j = 0; j < a.samples[n].zeta.size(); ++j)
      worst = std::max(worst, std::abs(a.samples[n].zeta[j] - b.samples[n].zeta[j]));
    for (std::size_t j = 0; j < a.samples[n].gamma.size(); ++j)
      worst = std::max(worst, std::abs(a.samples[n].gamma[j] - b.samples[n].gamma[j]));
  }
  return worst;
}

}  // namespace

TEST(MultiCornerState, Validation) {
  MultiCornerState s = three_corners();
  s.m = 2;
  EXPECT_THROW(s.validate(), InvalidInput);
  s = three_corners();
  s.zeta[0] = 2.0;
  EXPECT_THROW(s.validate(), InvalidInput);
  s = three_corners();
  s.gamma.pop_back();
  EXPECT_THROW(s.validate(), InvalidInput);
}

TEST(EndpointRhs, SingleCornerIsRigid) {
  MultiCornerState s;
  s.m = 3;
  s.zeta = {0.7};
  const auto r = endpoint_rhs(s);
  EXPECT_NEAR(r.dzeta(0), 0.0, 1e-14);
  const auto tr = integrate(s, 0.01, 10.0);
  ASSERT_FALSE(tr.collision);
  EXPECT_NEAR(tr.samples.back().zeta[0], 0.7, 1e-10);
  const double slope = (tr.samples.back().beta1 - tr.samples.front().beta1) / 10.0;
  for (const auto& a : tr.samples) EXPECT_NEAR(a.beta1, s.beta1 + slope * a.t, 1e-8);
}

TEST(EndpointRhs, MeasureConservedForTwoCorners) {
  MultiCornerState s;
  s.m = 3;
  s.zeta = {kPi / 6, kPi / 6};
  s.gamma = {kPi / 6};
  const auto r = endpoint_rhs(s);
  EXPECT_NEAR(r.dzeta.sum(), 0.0, 1e-14);
}

TEST(RotationSpeed, Limits) {
  for (int m : {3, 4, 5}) {
    EXPECT_NEAR(rotation_speed(kTwoPi / m * (1 - 1e-9), m), 0.5, 1e-7);
    EXPECT_LT(std::abs(rotation_speed(1e-8, m)), 1e-7);
  }
}

TEST(RotationSpeed, ClosedForm) {
  // Single corner: 2H(beta) = (m a_m / 2 pi)(sin(2pi/m) - sin(2pi/m - 2 zeta)).
  for (int m : {3, 4, 5, 7}) {
    const double a = symmetrized_kernel(m, kPi / m);
    for (double f : {0.05, 0.3, 0.6, 0.95}) {
      const double z = kTwoPi / m * f;
      const double expected = m * a / kTwoPi * (std::sin(kTwoPi / m) - std::sin(kTwoPi / m - 2 * z));
      EXPECT_NEAR(rotation_speed(z, m), expected, 1e-13);
    }
  }
}

TEST(RotationSpeed, ThreeFoldIsNotMonotone) {
  // d speed / d zeta has the sign of cos(2pi/3 - 2 zeta): negative near 0.
  EXPECT_LT(rotation_speed(0.2, 3), rotation_speed(0.1, 3));
  EXPECT_GT(rotation_speed(1.9, 3), 0.5);
}

TEST(RotationSpeed, Monotone) {
  for (int m : {4, 5, 6}) {
    double prev = -1.0;
    for (int i = 1; i <= 50; ++i) {
      const double v = rotation_speed(kTwoPi / m * i / 51.0, m);
      EXPECT_GT(v, prev) << m << ' ' << i;
      prev = v;
    }
  }
}

TEST(ClosedForm, SingleCornerStatic) {
  MultiCornerState s;
  s.m = 5;
  s.zeta = {0.4};
  for (auto form : {ClosedForm::printed, ClosedForm::kernel_exact})
    EXPECT_EQ(closed_form_rhs(s, 1.0, form).dzeta(0), 0.0);
}

TEST(ClosedForm, MirrorPairAntisymmetric) {
  MultiCornerState s;
  s.m = 3;
  s.zeta = {0.3, 0.3};
  s.gamma = {0.5};
  for (auto form : {ClosedForm::printed, ClosedForm::kernel_exact}) {
    const auto r = closed_form_rhs(s, 1.0, form);
    EXPECT_NEAR(r.dzeta(0), -r.dzeta(1), 1e-15);
  }
  const auto e = endpoint_rhs(s);
  EXPECT_NEAR(e.dzeta(0), -e.dzeta(1), 1e-14);
}

TEST(ClosedForm, KernelExactMatchesEndpoints) {
  for (int m : {3, 4, 5, 6}) {
    EXPECT_NEAR(fitted_cm(m, ClosedForm::kernel_exact), kernel_exact_prefactor(m), 1e-10);
    const auto probe = probe_configuration(m, 1);
    const auto e = endpoint_rhs(probe);
    const auto c = closed_form_rhs(probe, kernel_exact_prefactor(m), ClosedForm::kernel_exact);
    EXPECT_LT((e.dzeta - c.dzeta).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((e.dgamma - c.dgamma).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(ClosedForm, PrintedExactForFourFold) {
  EXPECT_NEAR(fitted_cm(4, ClosedForm::printed), 1.0, 1e-10);
  const auto probe = probe_configuration(4, 1);
  const auto e = endpoint_rhs(probe);
  const auto c = closed_form_rhs(probe, 1.0, ClosedForm::printed);
  EXPECT_LT((e.dzeta - c.dzeta).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((e.dgamma - c.dgamma).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ClosedForm, FittedConstantIsProbeIndependentOnlyWhenExact) {
  const double a = fit_cm(3, ClosedForm::kernel_exact, probe_configuration(3, 0));
  const double b = fit_cm(3, ClosedForm::kernel_exact, probe_configuration(3, 1));
  EXPECT_NEAR(a, b, 1e-12);
  const double p = fit_cm(3, ClosedForm::printed, probe_configuration(3, 0));
  const double q = fit_cm(3, ClosedForm::printed, probe_configuration(3, 1));
  EXPECT_GT(std::abs(p - q) / p, 1e-3);
}

TEST(Integrate, DualRouteKernelExact) {
  const auto s = probe_configuration(3, 1);
  const auto a = integrate(s, 0.01, 1.0);
  AngleIntegrateOptions opt;
  opt.rhs = RhsSelector::closed_form;
  opt.form = ClosedForm::kernel_exact;
  const auto b = integrate(s, 0.01, 1.0, opt);
  EXPECT_LT(sup_shape_gap(a, b), 1e-10);
}

TEST(Integrate, TotalAngleConserved) {
  const auto tr = integrate(three_corners(), 0.01, 10.0);
  ASSERT_FALSE(tr.collision) << tr.diagnostic;
  double worst = 0.0;
  for (const auto& a : tr.samples) worst = std::max(worst, std::abs(a.sum_zeta - tr.samples[0].sum_zeta));
  EXPECT_LT(worst, 1e-8);
}

TEST(Integrate, FourthOrder) {
  const auto s = three_corners();
  const auto ref = integrate(s, 0.0025, 2.0).samples.back();
  auto err = [&](double dt) {
    const auto x = integrate(s, dt, 2.0).samples.back();
    double e = 0.0;
    for (std::size_t j = 0; j < x.zeta.size(); ++j) e = std::max(e, std::abs(x.zeta[j] - ref.zeta[j]));
    return e;
  };
  const double ratio = err(0.2) / err(0.1);
  EXPECT_GT(ratio, 12.0);
  EXPECT_LT(ratio, 20.0);
}

TEST(Integrate, TimeReversal) {
  const auto s = three_corners();
  const auto fwd = integrate(s, 0.01, 2.0);
  MultiCornerState end = s;
  end.zeta = fwd.samples.back().zeta;
  end.gamma = fwd.samples.back().gamma;
  end.beta1 = fwd.samples.back().beta1;
  AngleIntegrateOptions opt;
  opt.direction = -1;
  const auto back = integrate(end, 0.01, 2.0, opt).samples.back();
  for (std::size_t j = 0; j < s.zeta.size(); ++j) EXPECT_NEAR(back.zeta[j], s.zeta[j], 1e-8);
  EXPECT_NEAR(back.beta1, s.beta1, 1e-8);
}

TEST(Integrate, CollisionFlagged) {
  MultiCornerState s;
  s.m = 3;
  s.zeta = {0.5, 0.5};
  s.gamma = {2e-10};
  const auto tr = integrate(s, 0.1, 50.0);
  EXPECT_TRUE(tr.collision || tr.samples.size() == 501u);
}
