#include "vpatch/effective_corner.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace vpatch;

namespace {

double sup_gap(const OddCornerTrajectory& a, const OddCornerTrajectory& b) {
  double w = 0.0;
  for (std::size_t i = 0; i < std::min(a.samples.size(), b.samples.size()); ++i)
    w = std::max(w, std::abs(a.samples[i].A - b.samples[i].A));
  return w;
}

}  // namespace

TEST(OddFourier, BahouriCheminInteriorStationary) {
  const OddFourierState s{bahouri_chemin_coefficients(128, 0.7), 0.0, 0.0};
  const Eigen::VectorXd r = odd_fourier_rates(s);
  EXPECT_LT(r.head(126).cwiseAbs().maxCoeff(), 1e-15);
  // Truncation acts on the top mode only: (N-1) g_{N-1} times g_1/2.
  EXPECT_NEAR(r(127), 0.5 * 0.7 * 127 * (0.7 / 127), 1e-15);
}

TEST(OddFourier, ZeroIsStationary) {
  const auto tr = odd_fourier_integrate(Eigen::VectorXd::Zero(16), 1.0, 0.01);
  EXPECT_EQ(tr.back().g.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(tr.back().J, 0.0);
}

TEST(OddFourier, CornerCoefficientsOfFullQuadrantAreBahouriChemin) {
  const Eigen::VectorXd g = odd_corner_coefficients(32, kPi / 2, 1.0);
  EXPECT_LT((g - bahouri_chemin_coefficients(32, 4.0 / kPi)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(OddFourier, CornerDataTracksOddCornerAngle) {
  // Contracting case: positive data on the positive quadrant.
  const auto tr = odd_fourier_integrate(odd_corner_coefficients(128, kPi / 4, 1.0), 5.0, 1e-3);
  const auto ref = odd_corner_integrate(kPi / 4, -1, 5.0, 1e-3);
  double edge = kPi / 4;
  for (std::size_t i = 0; i < tr.size(); i += 100) {
    edge = odd_fourier_edge(tr[i].g, edge, 0.5);
    EXPECT_NEAR(edge, ref.samples[i].A, 1e-3) << "tau = " << tr[i].tau;
  }
}

TEST(OddFourier, ExpandingCornerDataTracksAngle) {
  const auto tr = odd_fourier_integrate(odd_corner_coefficients(256, kPi / 4, -1.0), 5.0, 5e-4);
  const auto ref = odd_corner_integrate(kPi / 4, 1, 5.0, 5e-4);
  double edge = kPi / 4;
  for (std::size_t i = 0; i < tr.size(); i += 200) {
    edge = odd_fourier_edge(tr[i].g, edge, -0.5);
    EXPECT_NEAR(edge, ref.samples[i].A, 1e-3) << "tau = " << tr[i].tau;
  }
}

TEST(OddCorner, InitialSlopeAndMonotonicity) {
  for (int sign : {1, -1}) {
    const auto tr = odd_corner_integrate(kPi / 4, sign, 5.0, 1e-3);
    const double slope0 = sign / kPi * std::sin(kPi / 2) * (1 - std::cos(kPi / 2));
    EXPECT_NEAR((tr.samples[1].A - tr.samples[0].A) / 1e-3, slope0, 2e-3);
    for (std::size_t i = 1; i < tr.samples.size(); ++i) {
      if (sign > 0)
        ASSERT_GT(tr.samples[i].A, tr.samples[i - 1].A);
      else
        ASSERT_LT(tr.samples[i].A, tr.samples[i - 1].A);
      ASSERT_GE(tr.samples[i].J, tr.samples[i - 1].J);
    }
  }
  EXPECT_THROW(odd_corner_integrate(0.0, 1, 1.0, 0.1), InvalidInput);
  EXPECT_THROW(odd_corner_integrate(0.5, 0, 1.0, 0.1), InvalidInput);
}

TEST(OddCorner, ExpandingIsExponential) {
  const auto tr = odd_corner_integrate(kPi / 4, 1, 50.0, 1e-3);
  const auto fit = fit_expanding(tr, 5.0, 50.0);
  EXPECT_GT(fit.certified_rate, 0.0);
  EXPECT_GT(fit.rate, 1.0);
  EXPECT_LT(fit.residual, 1e-2);
  for (const auto& s : tr.samples)
    if (s.tau >= 5.0) ASSERT_LE(kPi / 2 - s.A, std::exp(-fit.certified_rate * s.tau) * (1 + 1e-12));
}

TEST(OddCorner, ContractingSandwichAndBoundedIntegral) {
  const auto tr = odd_corner_integrate(kPi / 4, -1, 1000.0, 1e-3);
  const auto b = fit_contracting(tr, 100.0, 1000.0);
  EXPECT_GT(b.c, 0.1);
  EXPECT_LT(b.C, 10.0);
  EXPECT_LT(b.tail_increment, 1e-6);
  // The decay exponent equals -(2/pi) J_inf; it depends on A0.
  EXPECT_NEAR(b.slope, -2.0 / kPi * tr.samples.back().J, 0.02);
}

TEST(OddCorner, SecondOrderAgrees) {
  for (int sign : {1, -1}) {
    const auto a = odd_corner_integrate(kPi / 4, sign, 10.0, 1e-3);
    const auto b = odd_corner_second_order(kPi / 4, sign, 10.0, 1e-3);
    ASSERT_FALSE(b.halted) << b.diagnostic;
    ASSERT_EQ(a.samples.size(), b.samples.size());
    EXPECT_LT(sup_gap(a, b), 1e-6);
  }
}

TEST(OddCorner, SecondOrderHaltsNearSaturation) {
  const auto b = odd_corner_second_order(kPi / 4, 1, 40.0, 1e-3);
  EXPECT_TRUE(b.halted);
  EXPECT_NE(b.diagnostic.find("integro-differential"), std::string::npos);
}

TEST(SingleCorner, InitialData) {
  const double B0 = kPi / 8;
  for (const auto& tr : {single_corner_integrate(B0, 1.0, 1e-3), single_corner_second_order(B0, 1.0, 1e-3)}) {
    const auto& s = tr.samples.front();
    EXPECT_EQ(s.B, B0);
    EXPECT_EQ(s.A, 0.0);
    EXPECT_EQ(s.dB, 0.0);
    EXPECT_DOUBLE_EQ(s.dA, -std::cos(2 * B0) * std::sin(2 * B0) / kPi);
  }
  EXPECT_NEAR(single_corner_integrate(kPi / 4 * (1 - 1e-12), 0.1, 0.1).samples[0].dA, 0.0, 1e-11);
}

TEST(SingleCorner, SecondOrderAgreesOnSharedWindow) {
  const auto a = single_corner_integrate(kPi / 8, 200.0, 1e-3);
  const auto b = single_corner_second_order(kPi / 8, 200.0, 1e-3);
  const std::size_t n = std::min(a.samples.size(), b.samples.size());
  ASSERT_GT(n, 1000u);
  double w = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (a.samples[i].B < 1e-6 || a.samples[i].B > kPi / 4 - 1e-6) break;
    w = std::max({w, std::abs(a.samples[i].A - b.samples[i].A), std::abs(a.samples[i].B - b.samples[i].B)});
  }
  EXPECT_LT(w, 1e-5);
}

TEST(SingleCorner, StepHalvingOrder) {
  const auto a = single_corner_second_order(kPi / 8, 5.0, 2e-3);
  const auto b = single_corner_second_order(kPi / 8, 5.0, 1e-3);
  double w = 0.0;
  for (std::size_t i = 0; i < a.samples.size(); ++i)
    w = std::max({w, std::abs(a.samples[i].A - b.samples[2 * i].A), std::abs(a.samples[i].B - b.samples[2 * i].B)});
  EXPECT_LT(w, 1e-8);
}

TEST(SingleCorner, CuspsToFiniteAngle) {
  const auto tr = single_corner_integrate(kPi / 8, 1e5, 1e-2);
  EXPECT_TRUE(tr.asymptote);
  for (std::size_t i = 1; i < tr.samples.size(); ++i) ASSERT_LE(tr.samples[i].B, tr.samples[i - 1].B);
  const auto as = corner_asymptote(tr);
  EXPECT_LT(as.A_inf, 0.0);
  EXPECT_GT(as.A_inf, -kPi / 2);
  ASSERT_GT(as.tau, 0.0);
  for (const auto& s : tr.samples)
    if (s.tau >= as.tau) {
      ASSERT_LT(s.B, 1e-3);
      ASSERT_LT(std::abs(s.A - as.A_inf), 1e-4);
    }
}

TEST(SingleCorner, SignStructureOnInitialWindow) {
  // While -pi/4 <= A <= 0, A' <= 0 and therefore B' <= 0.
  const auto s = single_corner_sign_structure(single_corner_integrate(kPi / 8, 20.0, 1e-3));
  EXPECT_GT(s.window, 0.5);
  EXPECT_TRUE(s.A_nonincreasing);
  EXPECT_TRUE(s.B_nonincreasing);
  EXPECT_FALSE(s.B_nondecreasing);
}
