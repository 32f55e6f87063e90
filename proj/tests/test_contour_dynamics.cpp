#include "vpatch/contour_dynamics.hpp"

#include "vpatch/angle_odes.hpp"
#include "vpatch/velocity_field.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace vpatch;

namespace {

double node_gap(const PatchContour& a, const PatchContour& b) {
  double w = 0.0;
  for (std::size_t l = 0; l < a.loops.size(); ++l)
    for (std::size_t i = 0; i < a.loops[l].nodes.size(); ++i)
      w = std::max(w, (a.loops[l].nodes[i].p - b.loops[l].nodes[i].p).norm());
  return w;
}

// Low-discrepancy probes at least `clearance` away from every boundary node.
std::vector<Point> probes(const PatchContour& c, int n, double extent, double clearance) {
  constexpr double a1 = 0.7548776662466927, a2 = 0.5698402909980532;
  std::vector<Point> out;
  for (int k = 1; static_cast<int>(out.size()) < n; ++k) {
    const Point x(extent * (2 * std::fmod(0.5 + a1 * k, 1.0) - 1), extent * (2 * std::fmod(0.5 + a2 * k, 1.0) - 1));
    bool ok = true;
    for (const auto& img : c.images())
      for (const auto& l : c.loops)
        for (const auto& nd : l.nodes) ok = ok && (img.T * nd.p - x).norm() > clearance;
    if (ok) out.push_back(x);
  }
  return out;
}

double worst_against_area_quadrature(const PatchContour& c, double extent) {
  const auto g = c.geometry();
  double worst = 0.0;
  for (const auto& x : probes(c, 100, extent, 0.02))
    worst = std::max(worst, (contour_velocity(c, x) - biot_savart_velocity(g, x).value).norm());
  return worst;
}

}  // namespace

TEST(SegmentIntegral, MatchesMidpointQuadrature) {
  const Point a(0.1, -0.3), b(0.7, 0.2);
  for (const Point& x : {Point(0.0, 0.0), Point(0.4, 0.0), Point(2.0, 1.0), Point(0.8, 0.3)}) {
    const int n = 200000;
    Point q = Point::Zero();
    for (int i = 0; i < n; ++i) q += std::log((x - (a + (i + 0.5) / n * (b - a))).norm()) * (b - a) / n;
    EXPECT_LT((segment_log_integral(x, a, b) - q).norm(), 1e-6) << x.transpose();
  }
  // On the segment itself the integrand is integrable.
  EXPECT_TRUE(segment_log_integral(a, a, b).allFinite());
  EXPECT_TRUE(segment_log_integral(0.5 * (a + b), a, b).allFinite());
}

TEST(ContourVelocity, DiscClosedForm) {
  const auto d = disc_contour(1.0, 256);
  EXPECT_LT((contour_velocity(d, Point(0.5, 0.0)) - Velocity(0.0, 0.25)).norm(), 1e-4);
  EXPECT_LT((contour_velocity(d, Point(0.0, 0.0))).norm(), 1e-12);
  // Outside: point vortex of the polygon's area.
  const Point x(0.0, 3.0);
  EXPECT_LT((contour_velocity(d, x) - d.area() / kTwoPi * perp(x) / x.squaredNorm()).norm(), 1e-12);
}

TEST(ContourVelocity, AgreesWithAreaQuadrature) {
  EXPECT_LT(worst_against_area_quadrature(sector_contour(-0.3, 0.4, 0.25, 3, default_mesh(0.25)), 0.35), 1e-4);
  EXPECT_LT(worst_against_area_quadrature(petal_contour(3, 0.5, default_mesh(0.5)), 0.6), 1e-4);
  EXPECT_LT(worst_against_area_quadrature(oddodd_contour(0.5, default_mesh(0.5)), 0.6), 1e-4);
}

TEST(ContourVelocity, SymmetricCornerIsStagnant) {
  for (int m : {3, 4, 5}) {
    const auto c = sector_contour(0.1, 0.1 + 1.5 / m, 0.25, m, default_mesh(0.25));
    EXPECT_LT(contour_velocity(c, Point::Zero()).norm(), 1e-8) << m;
  }
  EXPECT_LT(contour_velocity(oddodd_contour(0.5, default_mesh(0.5)), Point::Zero()).norm(), 1e-8);
}

TEST(PatchContour, RejectsBadLoops) {
  PatchContour c;
  c.loops.push_back({{{Point(0, 0), false}, {Point(0, 1), false}, {Point(1, 0), false}}});
  EXPECT_THROW(c.validate(), InvalidInput);  // clockwise
  PatchContour bow;
  bow.loops.push_back({{{Point(0, 0), false}, {Point(1, 1), false}, {Point(1, 0), false}, {Point(0, 1), false}}});
  EXPECT_THROW(bow.validate(), InvalidInput);
  EXPECT_THROW(sector_contour(0.0, 2.5, 1.0, 3, default_mesh(1.0)), InvalidInput);
}

TEST(PatchContour, GradedNearPinnedCorner) {
  const auto c = petal_contour(3, 0.5, default_mesh(0.5));
  const auto& n = c.loops[0].nodes;
  EXPECT_TRUE(c.is_pinned(n.front()));
  const double h1 = n[1].p.norm();
  EXPECT_NEAR(h1, 0.5e-4, 0.3e-4);
  // Spacing grows roughly geometrically away from the corner.
  const double h2 = (n[2].p - n[1].p).norm();
  EXPECT_GT(h2 / h1, 1.1);
  EXPECT_LT(h2 / h1, 1.6);
}

TEST(Evolve, DiscAreaConserved) {
  const auto d = disc_contour(1.0, 128);
  const auto res = evolve(d, 5.0);
  ASSERT_FALSE(res.halted) << res.diagnostic;
  EXPECT_LT(std::abs(res.contour.area() - d.area()), 1e-6);
  EXPECT_NEAR(res.contour.t, 5.0, 1e-12);
}

TEST(Evolve, TimeReversal) {
  const auto p = petal_contour(3, 0.5, default_mesh(0.5));
  EvolveOptions fwd;
  fwd.remesh = false;
  const auto a = evolve(p, 0.5, fwd);
  ASSERT_FALSE(a.halted);
  EvolveOptions back = fwd;
  back.reverse = true;
  const auto b = evolve(a.contour, 0.5, back);
  EXPECT_LT(node_gap(b.contour, p), 1e-5);
  EXPECT_NEAR(b.contour.t, 0.0, 1e-12);
}

TEST(Evolve, SymmetryClosure) {
  const auto p = petal_contour(3, 0.5, default_mesh(0.5));
  EvolveOptions opt;
  opt.remesh = false;
  opt.cfl = 1e9;
  opt.dt_max = 0.01;
  const auto a = evolve(p, 0.5, opt);
  const auto b = evolve(p.unrolled(), 0.5, opt);
  ASSERT_FALSE(a.halted || b.halted);
  EXPECT_EQ(a.steps, b.steps);
  EXPECT_LT(node_gap(a.contour.unrolled(), b.contour), 1e-8);
}

TEST(Evolve, SelfIntersectionNamesSegments) {
  PatchContour c = disc_contour(1.0, 64);
  std::swap(c.loops[0].nodes[10].p, c.loops[0].nodes[11].p);
  const auto hit = find_self_intersection(c);
  ASSERT_TRUE(hit.has_value());
  EXPECT_EQ(hit->loop_a, 0u);
  EXPECT_THROW(step(c, 0.01), NumericalFailure);
}

TEST(Remesh, PreservesArea) {
  const auto p = petal_contour(3, 0.5, default_mesh(0.5));
  EvolveOptions opt;
  opt.remesh = false;
  const auto moved = evolve(p, 1.0, opt).contour;
  const auto r = remesh(moved);
  EXPECT_LT(std::abs(r.area() - moved.area()), 1e-8);
  EXPECT_TRUE(r.is_pinned(r.loops[0].nodes.front()));
  EXPECT_EQ(r.loops[0].nodes[1].p, moved.loops[0].nodes[1].p);
  EXPECT_NO_THROW(r.validate());
}

TEST(Remesh, UniformCircleUnchanged) {
  const auto d = disc_contour(1.0, 256);
  EXPECT_FALSE(needs_remesh(d));
  const auto r = remesh(d);
  ASSERT_EQ(r.loops[0].nodes.size(), 256u);
  EXPECT_LT(node_gap(r, d), 1e-6);
}

TEST(CornerAngle, ExactSector) {
  const auto c = sector_contour(0.2, 0.2 + kPi / 4, 0.25, 3, default_mesh(0.25));
  for (const auto& e : measure_corner_angle(c, {1e-1, 1e-2, 1e-3}, 0.2 + kPi / 8)) {
    ASSERT_FALSE(e.skipped);
    EXPECT_NEAR(e.angle, kPi / 4, 1e-10);
    EXPECT_NEAR(e.sup_angle, kPi / 4, 1e-12);
    EXPECT_NEAR(e.center, 0.2 + kPi / 8, 1e-10);
    EXPECT_LT(e.fraction, 1e-12);
  }
}

TEST(CornerAngle, SkipsUnresolvedScale) {
  const auto c = sector_contour(0.0, 1.0, 0.25, 3, default_mesh(0.25));
  EXPECT_TRUE(measure_corner_angle(c, {1e-7}, 0.5).front().skipped);
}

TEST(CornerAngle, ClippedAreas) {
  const std::vector<Point> sq{{-1, -1}, {1, -1}, {1, 1}, {-1, 1}};
  EXPECT_NEAR(disc_clipped_area(sq, 0.5), kPi * 0.25, 1e-14);
  EXPECT_NEAR(disc_clipped_area(sq, 10.0), 4.0, 1e-12);
  const auto q = clip_to_wedge(sq, 0.0, kPi / 2);
  EXPECT_NEAR(signed_area(q), 1.0, 1e-14);
  EXPECT_NEAR(disc_clipped_area(q, 1.0), kPi / 4, 1e-14);
}

TEST(CornerAngle, PetalCornerIsRigid) {
  const double zeta = kPi / 3;
  const auto p = petal_contour(3, 0.5, default_mesh(0.5));
  const auto res = evolve(p, 1.0);
  ASSERT_FALSE(res.halted) << res.diagnostic;
  EXPECT_LT(std::abs(res.contour.area() - p.area()), 1e-6);
  const double speed = rotation_speed(zeta, 3);
  for (const auto& e : measure_corner_angle(res.contour, {1e-2, 1e-3}, kPi / 6 + speed)) {
    ASSERT_FALSE(e.skipped);
    EXPECT_LT(std::abs(e.angle - zeta) / zeta, 0.01) << e.r;
    EXPECT_LT(std::abs((e.center - kPi / 6) - speed) / speed, 0.02) << e.r;
  }
}

TEST(Experiments, JumpMovesTowardStretchingDirection) {
  for (double eps : {1e-2, 1e-3}) {
    const auto r = jump_experiment(kPi / 8, eps, 1.0);
    EXPECT_GT(r.advance, 0.02) << eps;
    // Positive vorticity in a sector about the x1-axis turns it clockwise.
    EXPECT_LT(r.center, r.center0);
  }
}

TEST(Experiments, OddOddOpensForwardAndClosesBackward) {
  const auto f = oddodd_experiment(0.2, false);
  ASSERT_FALSE(f.truncated) << f.diagnostic;
  for (double a : f.alpha_hat.front()) EXPECT_DOUBLE_EQ(a, 1.0);
  for (double a : f.alpha_hat.back()) EXPECT_GT(a, 1.05);
  const auto b = oddodd_experiment(0.2, true);
  ASSERT_FALSE(b.truncated) << b.diagnostic;
  for (double a : b.alpha_hat.back()) EXPECT_LT(a, 0.95);
  // Diagonal particles approach the x1-axis forward, the x2-axis backward.
  EXPECT_GE(f.ratio.back().back() / f.ratio.front().back(), 2.0);
  EXPECT_GE(b.ratio.front().back() / b.ratio.back().back(), 2.0);
}
