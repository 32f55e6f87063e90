#include "vpatch/velocity_field.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <variant>

namespace vpatch {

Velocity homogeneous_velocity(const StreamProfile& H, const Point& x) {
  const double r = x.norm();
  if (r == 0.0) return Velocity::Zero();
  const double t = std::atan2(x(1), x(0));
  Velocity u = 2.0 * H.value(t) * perp(x) - H.d1(t) * x;
  if (H.log_mode.c != 0.0 || H.log_mode.s != 0.0) {
    const double L = std::log(1.0 / r);
    const Point er = x / r;
    const double ur = -r * L * H.dG(t);
    const double ut = (2.0 * r * L - r) * H.G(t);
    u += ur * er + ut * perp(er);
  }
  return u;
}

Velocity spiral_velocity(const SpiralStreamProfile& H, const Point& x) {
  const double r = x.norm();
  if (r == 0.0) return Velocity::Zero();
  const double phi = H.pitch * std::log(1.0 / r) + std::atan2(x(1), x(0));
  const double h0 = H.value(phi);
  const double h1 = H.d1(phi);
  const Point er = x / r;
  return -r * h1 * er + r * (2.0 * h0 - H.pitch * h1) * perp(er);
}

Mat2 spiral_velocity_gradient(const SpiralStreamProfile& H, const Point& x, double rel_step) {
  return fd_gradient([&](const Point& y) { return spiral_velocity(H, y); }, x, rel_step * x.norm());
}

namespace {

Point unit(double psi) { return {std::cos(psi), std::sin(psi)}; }

}  // namespace

quad::Result<Velocity> biot_savart_velocity(const PatchGeometry& g, const Point& x,
                                            const quad::Options& opt) {
  std::vector<Chord> ch;
  auto f = [&](double psi) -> Eigen::Vector2d {
    const Point e = unit(psi);
    g.chords(x, e, ch);
    double L = 0.0;
    for (const auto& c : ch) L += c.value * (c.rho_b - c.rho_a);
    return (-L / kTwoPi) * perp(e);
  };
  return quad::integrate_with_breaks(f, 0.0, kTwoPi, g.breakpoints(x), opt);
}

quad::Result<Mat2> velocity_gradient(const PatchGeometry& g, const Point& x, const quad::Options& opt) {
  std::vector<Chord> ch;
  auto f = [&](double psi) -> Mat2 {
    g.chords(x, unit(psi), ch);
    double L = 0.0;
    for (const auto& c : ch) L += c.value * std::log(c.rho_b / (c.rho_a > 0.0 ? c.rho_a : 1.0));
    const double s2 = std::sin(2 * psi);
    const double c2 = std::cos(2 * psi);
    Mat2 sigma;
    sigma << s2, -c2, -c2, -s2;
    return (L / kTwoPi) * sigma;
  };
  auto r = quad::integrate_with_breaks(f, 0.0, kTwoPi, g.breakpoints(x), opt);
  const double w = g.vorticity_at(x);
  r.value(0, 1) -= 0.5 * w;
  r.value(1, 0) += 0.5 * w;
  return r;
}

std::array<Point, 2> separatrices(double c, double s) {
  if (c == 0.0 && s == 0.0) throw InvalidInput("separatrices undefined for (c, s) = (0, 0)");
  Eigen::SelfAdjointEigenSolver<Mat2> es(sector_log_gradient(c, s));
  // Eigenvalues ascending: compressing direction first.
  return {Point(es.eigenvectors().col(1)), Point(es.eigenvectors().col(0))};
}

RadialExpansion radial_expansion(const PatchGeometry& g, const Point& x, const quad::Options& opt) {
  RadialExpansion out;
  const double r = x.norm();
  if (r == 0.0) throw InvalidInput("radial expansion needs x != 0");
  const Point origin = Point::Zero();
  std::vector<Chord> ch;
  // Columns: u0 integrand (2), I^s, I^c.
  auto f = [&](double t) -> Eigen::Vector4d {
    const Point e = unit(t);
    g.chords(origin, e, ch);
    double L = 0.0;
    double lg = 0.0;
    for (const auto& c : ch) {
      L += c.value * (c.rho_b - c.rho_a);
      if (c.rho_b > r) lg += c.value * std::log(c.rho_b / std::max(c.rho_a, r));
    }
    // u(0) = (1/2pi) int (sin, -cos) omega dr dtheta, from the kernel at x = 0.
    return {std::sin(t) * L / kTwoPi, -std::cos(t) * L / kTwoPi, std::sin(2 * t) * lg,
            std::cos(2 * t) * lg};
  };
  auto brk = g.breakpoints(origin);
  const auto res = quad::integrate_with_breaks(f, 0.0, kTwoPi, brk, opt);
  out.u0 = res.value.head<2>();
  out.Is = res.value(2);
  out.Ic = res.value(3);
  const auto meas = biot_savart_velocity(g, x, opt);
  out.measured = meas.value;
  const double t = std::atan2(x(1), x(0));
  out.predicted = out.u0 + (r / kTwoPi) * (Velocity(std::cos(t), -std::sin(t)) * out.Is -
                                           Velocity(std::sin(t), std::cos(t)) * out.Ic);
  out.residual = out.measured - out.predicted;
  const double w = g.max_abs_vorticity();
  out.residual_ratio = w > 0.0 ? out.residual.norm() / (r * w) : 0.0;
  out.converged = res.converged && meas.converged;
  return out;
}

quad::Result<double> quadrant_integral(const PatchGeometry& g, const Point& x, const quad::Options& opt) {
  if (!(x(0) > 0.0 && x(1) > 0.0 && x(0) <= 0.5 && x(1) <= 0.5))
    throw InvalidInput("quadrant integral needs x in (0, 1/2]^2");
  const double y1lo = 2 * x(0);
  const double y2lo = 2 * x(1);
  const double span = 1.0 - y2lo;
  std::vector<Chord> ch;
  const Point up(0.0, 1.0);
  auto f = [&](double y1) {
    g.chords(Point(y1, y2lo), up, ch);
    double sum = 0.0;
    for (const auto& c : ch) {
      const double a = std::min(c.rho_a, span);
      const double b = std::min(c.rho_b, span);
      if (b <= a) continue;
      const double ya = y2lo + a;
      const double yb = y2lo + b;
      sum += c.value * y1 * 0.5 * (1.0 / (y1 * y1 + ya * ya) - 1.0 / (y1 * y1 + yb * yb));
    }
    return sum;
  };
  std::vector<double> brk;
  if (const auto* s = std::get_if<SectorStack>(&g.shape())) {
    for (const auto& sec : s->sectors) {
      for (double R : {sec.r_inner, sec.r_outer}) {
        brk.push_back(R);
        brk.push_back(-R);
        brk.push_back(R * std::cos(sec.theta_start));
        brk.push_back(R * std::cos(sec.theta_end));
        for (double yc : {y2lo, 1.0})
          if (R > yc) brk.push_back(std::sqrt(R * R - yc * yc));
      }
      for (double a : {sec.theta_start, sec.theta_end}) {
        if (std::sin(a) == 0.0) continue;
        for (double yc : {y2lo, 1.0}) brk.push_back(yc * std::cos(a) / std::sin(a));
      }
    }
  } else {
    // Vertices, and edge crossings of the clip lines y2 = 2 x2 and y2 = 1.
    for (const auto& loop : std::get<PolygonPatch>(g.shape()).loops) {
      const std::size_t n = loop.nodes.size();
      for (std::size_t i = 0; i < n; ++i) {
        const Point& p = loop.nodes[i];
        const Point& q = loop.nodes[(i + 1) % n];
        brk.push_back(p(0));
        for (double yc : {y2lo, 1.0})
          if ((p(1) - yc) * (q(1) - yc) < 0.0)
            brk.push_back(p(0) + (yc - p(1)) * (q(0) - p(0)) / (q(1) - p(1)));
      }
    }
  }
  auto r = quad::integrate_with_breaks(f, y1lo, 1.0, brk, opt);
  r.value *= 4.0 / kPi;
  r.error_estimate *= 4.0 / kPi;
  return r;
}

void write_field_csv(std::ostream& os, const PatchGeometry& g, const std::vector<Point>& points) {
  os << "x1,x2,u1,u2,du11,du12,du21,du22\n";
  os.precision(17);
  for (const auto& p : points) {
    const auto u = biot_savart_velocity(g, p).value;
    const auto du = velocity_gradient(g, p).value;
    os << p(0) << ',' << p(1) << ',' << u(0) << ',' << u(1) << ',' << du(0, 0) << ',' << du(0, 1) << ','
       << du(1, 0) << ',' << du(1, 1) << '\n';
  }
}

}  // namespace vpatch
