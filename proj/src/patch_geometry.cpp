#include "vpatch/patch_geometry.hpp"

#include <algorithm>
#include <cmath>

namespace vpatch {

namespace {

bool angle_in(double theta, double start, double end) {
  if (end - start >= kTwoPi) return true;
  const double d = theta - start;
  return d - kTwoPi * std::floor(d / kTwoPi) <= end - start;
}

bool in_sector(const AnnularSector& s, const Point& y) {
  const double r = y.norm();
  return r >= s.r_inner && r <= s.r_outer && angle_in(std::atan2(y(1), y(0)), s.theta_start, s.theta_end);
}

double to_unit_turn(double a) { return a - kTwoPi * std::floor(a / kTwoPi); }

void sector_chords(const AnnularSector& s, const Point& x, const Point& e, std::vector<Chord>& out) {
  double cand[8];
  int n = 0;
  cand[n++] = 0.0;
  const double xe = x.dot(e);
  const double xx = x.squaredNorm();
  for (double R : {s.r_inner, s.r_outer}) {
    if (R <= 0.0) continue;
    const double disc = xe * xe - xx + R * R;
    if (disc <= 0.0) continue;
    const double sq = std::sqrt(disc);
    for (double rho : {-xe - sq, -xe + sq})
      if (rho > 0.0) cand[n++] = rho;
  }
  if (s.theta_end - s.theta_start < kTwoPi) {
    for (double a : {s.theta_start, s.theta_end}) {
      const Point nrm(-std::sin(a), std::cos(a));
      const double ne = nrm.dot(e);
      if (ne == 0.0) continue;
      const double rho = -nrm.dot(x) / ne;
      if (rho > 0.0) cand[n++] = rho;
    }
  }
  const double far = std::sqrt(xx) + s.r_outer + 1.0;
  std::sort(cand, cand + n);
  const std::size_t first = out.size();
  for (int i = 0; i < n; ++i) {
    const double a = cand[i];
    const double b = i + 1 < n ? cand[i + 1] : far;
    if (!(b > a)) continue;
    if (!in_sector(s, x + (0.5 * (a + b)) * e)) continue;
    if (out.size() > first && out.back().rho_b == a) {
      out.back().rho_b = b;
    } else {
      out.push_back({a, b, s.value});
    }
  }
}

void polygon_chords(const PolygonLoop& loop, const Point& x, const Point& e, std::vector<Chord>& out,
                    std::vector<double>& hits) {
  hits.clear();
  const auto& v = loop.nodes;
  const std::size_t n = v.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point p = v[i] - x;
    const Point q = v[(i + 1) % n] - x;
    const double sp = cross2(e, p);
    const double sq = cross2(e, q);
    if ((sp > 0.0) == (sq > 0.0)) continue;
    const Point d = q - p;
    const double den = cross2(e, d);
    if (den == 0.0) continue;
    const double rho = cross2(p, d) / den;
    if (rho > 0.0) hits.push_back(rho);
  }
  std::sort(hits.begin(), hits.end());
  // Odd number of crossings beyond rho = 0 means the ray starts inside.
  std::size_t i = 0;
  double start = 0.0;
  if (hits.size() % 2 == 1) {
    out.push_back({0.0, hits[0], loop.value});
    i = 1;
  }
  for (; i + 1 < hits.size(); i += 2) {
    start = hits[i];
    out.push_back({start, hits[i + 1], loop.value});
  }
}

}  // namespace

SectorStack SectorStack::from_profile(const IntervalProfile& h, double r_inner, double r_outer,
                                      double amplitude) {
  if (!(r_inner >= 0.0 && r_outer > r_inner)) throw InvalidInput("sector stack needs 0 <= r_inner < r_outer");
  h.validate();
  SectorStack s;
  for (const auto& q : h.reconstructed())
    s.sectors.push_back({q.start, q.end, r_inner, r_outer, amplitude * q.value});
  return s;
}

SectorStack SectorStack::disc(double radius, double value) {
  return {{{-kPi, kPi, 0.0, radius, value}}};
}

PatchGeometry::PatchGeometry(SectorStack s) : shape_(std::move(s)) {}
PatchGeometry::PatchGeometry(PolygonPatch p) : shape_(std::move(p)) {
  for (const auto& l : std::get<PolygonPatch>(shape_).loops)
    if (l.nodes.size() < 3) throw InvalidInput("polygon loop needs at least 3 nodes");
}

void PatchGeometry::chords(const Point& x, const Point& e, std::vector<Chord>& out) const {
  out.clear();
  if (const auto* s = std::get_if<SectorStack>(&shape_)) {
    for (const auto& sec : s->sectors) sector_chords(sec, x, e, out);
  } else {
    thread_local std::vector<double> hits;
    for (const auto& loop : std::get<PolygonPatch>(shape_).loops) polygon_chords(loop, x, e, out, hits);
  }
}

std::vector<double> PatchGeometry::breakpoints(const Point& x) const {
  std::vector<double> out;
  auto toward = [&](const Point& y) {
    const Point d = y - x;
    if (d.squaredNorm() > 0.0) out.push_back(to_unit_turn(std::atan2(d(1), d(0))));
  };
  if (const auto* s = std::get_if<SectorStack>(&shape_)) {
    const double rx = x.norm();
    toward(Point::Zero());
    for (const auto& sec : s->sectors) {
      for (double R : {sec.r_inner, sec.r_outer}) {
        if (R <= 0.0) continue;
        if (sec.theta_end - sec.theta_start < kTwoPi) {
          toward(R * Point(std::cos(sec.theta_start), std::sin(sec.theta_start)));
          toward(R * Point(std::cos(sec.theta_end), std::sin(sec.theta_end)));
        }
        if (rx > R) {
          const double base = std::atan2(-x(1), -x(0));
          const double half = std::asin(R / rx);
          out.push_back(to_unit_turn(base + half));
          out.push_back(to_unit_turn(base - half));
        }
      }
    }
  } else {
    for (const auto& loop : std::get<PolygonPatch>(shape_).loops)
      for (const auto& v : loop.nodes) toward(v);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double PatchGeometry::vorticity_at(const Point& x) const {
  double w = 0.0;
  if (const auto* s = std::get_if<SectorStack>(&shape_)) {
    for (const auto& sec : s->sectors)
      if (in_sector(sec, x)) w += sec.value;
  } else {
    for (const auto& loop : std::get<PolygonPatch>(shape_).loops)
      if (point_in_polygon(loop.nodes, x)) w += loop.value;
  }
  return w;
}

double PatchGeometry::max_abs_vorticity() const {
  double w = 0.0;
  if (const auto* s = std::get_if<SectorStack>(&shape_)) {
    for (const auto& sec : s->sectors) w = std::max(w, std::abs(sec.value));
  } else {
    for (const auto& loop : std::get<PolygonPatch>(shape_).loops) w = std::max(w, std::abs(loop.value));
  }
  return w;
}

double PatchGeometry::support_radius() const {
  double r = 0.0;
  if (const auto* s = std::get_if<SectorStack>(&shape_)) {
    for (const auto& sec : s->sectors) r = std::max(r, sec.r_outer);
  } else {
    for (const auto& loop : std::get<PolygonPatch>(shape_).loops)
      for (const auto& v : loop.nodes) r = std::max(r, v.norm());
  }
  return r;
}

double PatchGeometry::circulation() const {
  double c = 0.0;
  if (const auto* s = std::get_if<SectorStack>(&shape_)) {
    for (const auto& sec : s->sectors)
      c += sec.value * 0.5 * (sec.theta_end - sec.theta_start) *
           (sec.r_outer * sec.r_outer - sec.r_inner * sec.r_inner);
  } else {
    for (const auto& loop : std::get<PolygonPatch>(shape_).loops)
      c += loop.value * std::abs(signed_area(loop.nodes));
  }
  return c;
}

double signed_area(const std::vector<Point>& nodes) {
  double a = 0.0;
  const std::size_t n = nodes.size();
  for (std::size_t i = 0; i < n; ++i) a += cross2(nodes[i], nodes[(i + 1) % n]);
  return 0.5 * a;
}

bool point_in_polygon(const std::vector<Point>& nodes, const Point& x) {
  bool inside = false;
  const std::size_t n = nodes.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point& a = nodes[i];
    const Point& b = nodes[j];
    if ((a(1) > x(1)) != (b(1) > x(1))) {
      const double xc = a(0) + (x(1) - a(1)) * (b(0) - a(0)) / (b(1) - a(1));
      if (x(0) < xc) inside = !inside;
    }
  }
  return inside;
}

}  // namespace vpatch
