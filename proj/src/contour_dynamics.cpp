#include "vpatch/contour_dynamics.hpp"

#include "vpatch/angular_profile.hpp"
#include "vpatch/rk4.hpp"

#include <unsupported/Eigen/Splines>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

namespace vpatch {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kOriginTol = 1e-12;

using Curve = std::function<Point(double)>;

struct CornerSets {
  std::vector<Point> pinned;
  std::vector<Point> free;

  double target(const MeshSpec& m, const Point& x) const {
    double dp = kInf, dc = kInf;
    for (const auto& p : pinned) dp = std::min(dp, (x - p).norm());
    for (const auto& p : free) dc = std::min(dc, (x - p).norm());
    return m.target(dp, dc);
  }
};

CornerSets corner_sets(const PatchContour& c, const ContourLoop& loop) {
  CornerSets s;
  for (const auto& n : loop.nodes) {
    if (!n.corner) continue;
    (c.is_pinned(n) ? s.pinned : s.free).push_back(n.p);
  }
  return s;
}

// Arclength positions in [s_from, s_to] equidistributing ds / target along the
// curve; both ends included.
std::vector<double> place_nodes(const Curve& curve, double s_from, double s_to, const MeshSpec& mesh,
                                const CornerSets& corners) {
  std::vector<double> s{s_from}, phi{0.0};
  double cur = s_from;
  while (cur < s_to) {
    const double h = std::min(0.02 * corners.target(mesh, curve(cur)), s_to - cur);
    const double next = cur + std::max(h, 1e-15 * (s_to - s_from));
    const double t0 = corners.target(mesh, curve(cur));
    const double t1 = corners.target(mesh, curve(std::min(next, s_to)));
    phi.push_back(phi.back() + 0.5 * (next - cur) * (1.0 / t0 + 1.0 / t1));
    cur = std::min(next, s_to);
    s.push_back(cur);
  }
  const int n = std::max(1, static_cast<int>(std::lround(phi.back())));
  std::vector<double> out{s_from};
  std::size_t k = 0;
  for (int i = 1; i < n; ++i) {
    const double want = phi.back() * i / n;
    while (k + 1 < phi.size() && phi[k + 1] < want) ++k;
    const double f = (want - phi[k]) / (phi[k + 1] - phi[k]);
    out.push_back(s[k] + f * (s[k + 1] - s[k]));
  }
  out.push_back(s_to);
  return out;
}

// Dense arclength table of a parametric curve on [u0, u1], clustered at both ends.
struct ArcTable {
  std::vector<double> u, s;

  ArcTable(const std::function<Point(double)>& f, double u0, double u1, int n = 200000) {
    u.resize(n + 1);
    s.resize(n + 1);
    Point prev = f(u0);
    for (int k = 0; k <= n; ++k) {
      u[k] = u0 + (u1 - u0) * 0.5 * (1.0 - std::cos(kPi * k / n));
      const Point p = f(u[k]);
      s[k] = k == 0 ? 0.0 : s[k - 1] + (p - prev).norm();
      prev = p;
    }
  }
  double length() const { return s.back(); }
  double param(double arc) const {
    const auto it = std::lower_bound(s.begin(), s.end(), arc);
    if (it == s.begin()) return u.front();
    if (it == s.end()) return u.back();
    const std::size_t k = it - s.begin();
    const double f = (arc - s[k - 1]) / (s[k] - s[k - 1]);
    return u[k - 1] + f * (u[k] - u[k - 1]);
  }
};

void append_arc(ContourLoop& loop, const Curve& curve, double S, const MeshSpec& mesh, const CornerSets& corners,
                bool start_corner) {
  const auto s = place_nodes(curve, 0.0, S, mesh, corners);
  for (std::size_t i = 0; i + 1 < s.size(); ++i) loop.nodes.push_back({curve(s[i]), i == 0 && start_corner});
}

double cross_seg(const Point& a, const Point& b, const Point& c) { return cross2(b - a, c - a); }

bool segments_cross(const Point& p1, const Point& p2, const Point& q1, const Point& q2) {
  const double d1 = cross_seg(q1, q2, p1), d2 = cross_seg(q1, q2, p2);
  const double d3 = cross_seg(p1, p2, q1), d4 = cross_seg(p1, p2, q2);
  return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0)) && d1 != 0 && d2 != 0 && d3 != 0 && d4 != 0;
}

std::vector<Point> positions(const ContourLoop& l) {
  std::vector<Point> p;
  p.reserve(l.nodes.size());
  for (const auto& n : l.nodes) p.push_back(n.p);
  return p;
}

// Signed area of triangle (0, a, b) intersected with the disc of radius r.
double triangle_disc_area(const Point& a, const Point& b, double r) {
  const Point d = b - a;
  const double A = d.squaredNorm();
  if (A == 0.0) return 0.0;
  const double B = 2.0 * a.dot(d), C = a.squaredNorm() - r * r;
  std::vector<double> ts{0.0};
  const double disc = B * B - 4 * A * C;
  if (disc > 0) {
    const double sq = std::sqrt(disc);
    for (double t : {(-B - sq) / (2 * A), (-B + sq) / (2 * A)})
      if (t > 0.0 && t < 1.0) ts.push_back(t);
  }
  ts.push_back(1.0);
  double area = 0.0;
  for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
    const Point p = a + ts[i] * d, q = a + ts[i + 1] * d;
    const Point m = a + 0.5 * (ts[i] + ts[i + 1]) * d;
    if (m.norm() <= r)
      area += 0.5 * cross2(p, q);
    else
      area += 0.5 * r * r * std::atan2(cross2(p, q), p.dot(q));
  }
  return area;
}

std::vector<Point> clip_half_plane(const std::vector<Point>& poly, const Point& normal) {
  std::vector<Point> out;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point& a = poly[i];
    const Point& b = poly[(i + 1) % n];
    const double da = normal.dot(a), db = normal.dot(b);
    if (da >= 0) out.push_back(a);
    if ((da >= 0) != (db >= 0)) out.push_back(a + (da / (da - db)) * (b - a));
  }
  return out;
}

Eigen::VectorXd stack(const PatchContour& c, const std::vector<Point>* tracers) {
  Eigen::VectorXd y(2 * (c.node_count() + (tracers ? tracers->size() : 0)));
  Eigen::Index k = 0;
  for (const auto& l : c.loops)
    for (const auto& n : l.nodes) y.segment<2>(2 * k++) = n.p;
  if (tracers)
    for (const auto& p : *tracers) y.segment<2>(2 * k++) = p;
  return y;
}

void unstack(const Eigen::VectorXd& y, PatchContour& c, std::vector<Point>* tracers) {
  Eigen::Index k = 0;
  for (auto& l : c.loops)
    for (auto& n : l.nodes) n.p = y.segment<2>(2 * k++);
  if (tracers)
    for (auto& p : *tracers) p = y.segment<2>(2 * k++);
}

}  // namespace

double MeshSpec::target(double dist_pinned, double dist_corner) const {
  return std::min({h_max, h0 + (ratio - 1.0) * dist_pinned, h_corner + (ratio - 1.0) * dist_corner});
}

MeshSpec default_mesh(double scale) {
  MeshSpec m;
  m.h0 = 1e-4 * scale;
  m.h_max = 0.02 * scale;
  m.h_corner = 0.005 * scale;
  return m;
}

// ---- PatchContour ----------------------------------------------------------------

bool PatchContour::pins_origin() const {
  return pin_origin.value_or(symmetry_order >= 2 || symmetry == ContourSymmetry::odd_odd);
}

bool PatchContour::is_pinned(const ContourNode& n) const {
  return n.corner && pins_origin() && n.p.norm() <= kOriginTol;
}

std::vector<ContourImage> PatchContour::images() const {
  if (symmetry == ContourSymmetry::odd_odd) {
    Mat2 rx, ry;
    rx << -1, 0, 0, 1;
    ry << 1, 0, 0, -1;
    return {{Mat2::Identity(), 1.0}, {rx, -1.0}, {ry, -1.0}, {-Mat2::Identity(), 1.0}};
  }
  std::vector<ContourImage> out;
  for (int j = 0; j < symmetry_order; ++j) out.push_back({rotation(kTwoPi * j / symmetry_order), 1.0});
  return out;
}

void PatchContour::validate() const {
  if (symmetry_order < 1) throw InvalidInput("symmetry order must be >= 1");
  if (loops.empty()) throw InvalidInput("contour has no loops");
  for (std::size_t i = 0; i < loops.size(); ++i) {
    if (loops[i].nodes.size() < 3) throw InvalidInput("loop " + std::to_string(i) + " has fewer than 3 nodes");
    for (const auto& n : loops[i].nodes)
      if (!n.p.allFinite()) throw InvalidInput("loop " + std::to_string(i) + " has a non-finite node");
    if (signed_area(positions(loops[i])) <= 0.0)
      throw InvalidInput("loop " + std::to_string(i) + " is not counterclockwise");
  }
  if (const auto hit = find_self_intersection(*this)) {
    std::ostringstream os;
    os << "segments (" << hit->loop_a << ',' << hit->seg_a << ") and (" << hit->loop_b << ',' << hit->seg_b
       << ") intersect";
    throw InvalidInput(os.str());
  }
}

double PatchContour::area() const {
  double a = 0.0;
  for (const auto& l : loops) a += signed_area(positions(l));
  return a;
}

std::size_t PatchContour::node_count() const {
  std::size_t n = 0;
  for (const auto& l : loops) n += l.nodes.size();
  return n;
}

PatchContour PatchContour::unrolled() const {
  PatchContour out;
  out.amplitude = amplitude;
  out.mesh = mesh;
  out.t = t;
  out.pin_origin = pins_origin();
  if (symmetry == ContourSymmetry::odd_odd)
    throw InvalidInput("odd-odd images carry opposite signs; unrolling needs per-loop amplitudes");
  for (const auto& img : images())
    for (const auto& l : loops) {
      ContourLoop r;
      for (const auto& n : l.nodes) r.nodes.push_back({img.T * n.p, n.corner});
      out.loops.push_back(std::move(r));
    }
  return out;
}

PatchGeometry PatchContour::geometry() const {
  PolygonPatch p;
  for (const auto& img : images())
    for (const auto& l : loops) {
      PolygonLoop r;
      r.value = amplitude * img.sign;
      for (const auto& n : l.nodes) r.nodes.push_back(img.T * n.p);
      p.loops.push_back(std::move(r));
    }
  return PatchGeometry(std::move(p));
}

// ---- builders ---------------------------------------------------------------------

PatchContour disc_contour(double R, int n, double amplitude) {
  if (!(R > 0.0) || n < 3) throw InvalidInput("disc contour needs R > 0 and n >= 3");
  PatchContour c;
  c.amplitude = amplitude;
  c.mesh = default_mesh(R);
  c.mesh.h_max = kTwoPi * R / n;
  ContourLoop l;
  for (int i = 0; i < n; ++i) l.nodes.push_back({Point(R * std::cos(kTwoPi * i / n), R * std::sin(kTwoPi * i / n)), false});
  c.loops.push_back(std::move(l));
  return c;
}

PatchContour sector_contour(double theta_a, double theta_b, double R, int m, const MeshSpec& mesh, double amplitude) {
  if (!(theta_b > theta_a) || !(R > 0.0) || m < 1 || theta_b - theta_a >= kTwoPi / m)
    throw InvalidInput("sector contour needs theta_a < theta_b, width below 2pi/m and R > 0");
  PatchContour c;
  c.symmetry_order = m;
  c.amplitude = amplitude;
  c.mesh = mesh;
  const Point ea(std::cos(theta_a), std::sin(theta_a)), eb(std::cos(theta_b), std::sin(theta_b));
  CornerSets corners;
  corners.pinned.push_back(Point::Zero());
  corners.free = {R * ea, R * eb};
  ContourLoop l;
  append_arc(l, [&](double s) { return Point(s * ea); }, R, mesh, corners, true);
  const double width = theta_b - theta_a;
  append_arc(
      l, [&](double s) { const double th = theta_a + s / R; return Point(R * std::cos(th), R * std::sin(th)); },
      R * width, mesh, corners, true);
  append_arc(l, [&](double s) { return Point((R - s) * eb); }, R, mesh, corners, true);
  l.nodes.front().p = Point::Zero();
  c.loops.push_back(std::move(l));
  c.validate();
  return c;
}

PatchContour petal_contour(int m, double R, const MeshSpec& mesh, double amplitude) {
  if (m < 2 || !(R > 0.0)) throw InvalidInput("petal contour needs m >= 2 and R > 0");
  PatchContour c;
  c.symmetry_order = m;
  c.amplitude = amplitude;
  c.mesh = mesh;
  auto f = [m, R](double th) { const double r = R * std::sin(m * th); return Point(r * std::cos(th), r * std::sin(th)); };
  const ArcTable table(f, 0.0, kPi / m);
  CornerSets corners;
  corners.pinned.push_back(Point::Zero());
  ContourLoop l;
  append_arc(l, [&](double s) { return f(table.param(s)); }, table.length(), mesh, corners, true);
  l.nodes.front().p = Point::Zero();
  c.loops.push_back(std::move(l));
  c.validate();
  return c;
}

PatchContour oddodd_contour(double L, const MeshSpec& mesh, double amplitude) {
  if (!(L > 0.0)) throw InvalidInput("odd-odd contour needs L > 0");
  PatchContour c;
  c.symmetry = ContourSymmetry::odd_odd;
  c.amplitude = amplitude;
  c.mesh = mesh;
  const Point top_right(L, L), top_left(0.0, L);
  CornerSets corners;
  corners.pinned.push_back(Point::Zero());
  corners.free = {top_right, top_left};
  const double diag = std::sqrt(2.0) * L;
  ContourLoop l;
  append_arc(l, [&](double s) { return Point(top_right * (s / diag)); }, diag, mesh, corners, true);
  append_arc(l, [&](double s) { return Point(L - s, L); }, L, mesh, corners, true);
  append_arc(l, [&](double s) { return Point(0.0, L - s); }, L, mesh, corners, true);
  l.nodes.front().p = Point::Zero();
  c.loops.push_back(std::move(l));
  c.validate();
  return c;
}

// ---- velocity ----------------------------------------------------------------------

Point segment_log_integral(const Point& x, const Point& a, const Point& b) {
  const Point d = b - a;
  const double L = d.norm();
  if (L == 0.0) return Point::Zero();
  const Point e = d / L;
  const Point w = x - a;
  const double p = w.dot(e);
  const double h = std::abs(cross2(e, w));
  // Antiderivative of ln sqrt(s^2 + h^2).
  auto F = [h](double s) {
    const double q = s * s + h * h;
    const double lg = s == 0.0 ? 0.0 : 0.5 * s * std::log(q);
    const double at = h == 0.0 ? 0.0 : h * std::atan(s / h);
    return lg - s + at;
  };
  return e * (F(L - p) - F(-p));
}

namespace {

Velocity loop_velocity(const std::vector<Point>& nodes, const Point& x) {
  Point sum = Point::Zero();
  const std::size_t n = nodes.size();
  for (std::size_t i = 0; i < n; ++i) sum += segment_log_integral(x, nodes[i], nodes[(i + 1) % n]);
  return -sum / kTwoPi;
}

}  // namespace

Velocity contour_velocity(const PatchContour& c, const Point& x) {
  Velocity u = Velocity::Zero();
  const auto imgs = c.images();
  for (const auto& l : c.loops) {
    const auto nodes = positions(l);
    for (const auto& img : imgs) u += img.sign * img.T.determinant() * (img.T * loop_velocity(nodes, img.T.transpose() * x));
  }
  return c.amplitude * u;
}

std::vector<Velocity> contour_velocity(const PatchContour& c, const std::vector<Point>& at) {
  std::vector<Velocity> out;
  out.reserve(at.size());
  const auto imgs = c.images();
  std::vector<std::vector<Point>> loops;
  for (const auto& l : c.loops) loops.push_back(positions(l));
  for (const auto& x : at) {
    Velocity u = Velocity::Zero();
    for (const auto& nodes : loops)
      for (const auto& img : imgs)
        u += img.sign * img.T.determinant() * (img.T * loop_velocity(nodes, img.T.transpose() * x));
    out.push_back(c.amplitude * u);
  }
  return out;
}

// ---- evolution ---------------------------------------------------------------------

std::optional<SelfIntersection> find_self_intersection(const PatchContour& c) {
  struct Seg {
    std::size_t loop, idx;
    Point a, b;
    double xmin, xmax, ymin, ymax;
  };
  std::vector<Seg> segs;
  for (std::size_t li = 0; li < c.loops.size(); ++li) {
    const auto& nodes = c.loops[li].nodes;
    const std::size_t n = nodes.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Point a = nodes[i].p, b = nodes[(i + 1) % n].p;
      segs.push_back({li, i, a, b, std::min(a(0), b(0)), std::max(a(0), b(0)), std::min(a(1), b(1)),
                      std::max(a(1), b(1))});
    }
  }
  std::sort(segs.begin(), segs.end(), [](const Seg& s, const Seg& t) { return s.xmin < t.xmin; });
  for (std::size_t i = 0; i < segs.size(); ++i) {
    for (std::size_t j = i + 1; j < segs.size() && segs[j].xmin <= segs[i].xmax; ++j) {
      const Seg &s = segs[i], &t = segs[j];
      if (t.ymin > s.ymax || s.ymin > t.ymax) continue;
      if (s.loop == t.loop) {
        const std::size_t n = c.loops[s.loop].nodes.size();
        if ((s.idx + 1) % n == t.idx || (t.idx + 1) % n == s.idx) continue;
      }
      if (segments_cross(s.a, s.b, t.a, t.b)) return SelfIntersection{s.loop, s.idx, t.loop, t.idx};
    }
  }
  return std::nullopt;
}

namespace {

Eigen::VectorXd node_velocities(const PatchContour& proto, const Eigen::VectorXd& y, bool with_tracers,
                                std::size_t n_tracers, double direction) {
  PatchContour c = proto;
  std::vector<Point> tr(n_tracers);
  unstack(y, c, with_tracers ? &tr : nullptr);
  std::vector<Point> at;
  at.reserve(y.size() / 2);
  for (const auto& l : c.loops)
    for (const auto& n : l.nodes) at.push_back(n.p);
  for (const auto& p : tr) at.push_back(p);
  const auto u = contour_velocity(c, at);
  Eigen::VectorXd out(y.size());
  Eigen::Index k = 0;
  for (const auto& l : c.loops)
    for (const auto& n : l.nodes) {
      out.segment<2>(2 * k) = c.is_pinned(n) ? Velocity::Zero() : Velocity(direction * u[k]);
      ++k;
    }
  for (std::size_t i = 0; i < tr.size(); ++i, ++k) out.segment<2>(2 * k) = direction * u[k];
  return out;
}

PatchContour step_impl(const PatchContour& c, double dt, std::vector<Point>* tracers, double direction) {
  const std::size_t nt = tracers ? tracers->size() : 0;
  auto f = [&](double, const Eigen::VectorXd& y) { return node_velocities(c, y, tracers != nullptr, nt, direction); };
  const Eigen::VectorXd y = rk4_step(f, c.t, stack(c, tracers), dt);
  PatchContour out = c;
  unstack(y, out, tracers);
  for (auto& l : out.loops)
    for (auto& n : l.nodes)
      if (c.is_pinned(n)) n.p = Point::Zero();
  out.t = c.t + direction * dt;
  if (const auto hit = find_self_intersection(out)) {
    std::ostringstream os;
    os << "self-intersection after step to t = " << out.t << ": segments (" << hit->loop_a << ',' << hit->seg_a
       << ") and (" << hit->loop_b << ',' << hit->seg_b << ')';
    throw NumericalFailure(os.str());
  }
  return out;
}

}  // namespace

PatchContour step(const PatchContour& c, double dt, std::vector<Point>* tracers) {
  if (!(dt > 0.0)) throw InvalidInput("step needs dt > 0");
  return step_impl(c, dt, tracers, 1.0);
}

double cfl_time_step(const PatchContour& c, double cfl, double dt_max) {
  std::vector<Point> at;
  for (const auto& l : c.loops)
    for (const auto& n : l.nodes) at.push_back(n.p);
  const auto u = contour_velocity(c, at);
  double dt = dt_max;
  std::size_t k = 0;
  for (const auto& l : c.loops) {
    const std::size_t n = l.nodes.size();
    for (std::size_t i = 0; i < n; ++i, ++k) {
      if (c.is_pinned(l.nodes[i])) continue;
      const double h = std::min((l.nodes[i].p - l.nodes[(i + 1) % n].p).norm(),
                                (l.nodes[i].p - l.nodes[(i + n - 1) % n].p).norm());
      const double speed = u[k].norm();
      if (speed > 0.0) dt = std::min(dt, cfl * h / speed);
    }
  }
  return dt;
}

bool needs_remesh(const PatchContour& c) {
  for (const auto& l : c.loops) {
    const CornerSets corners = corner_sets(c, l);
    const std::size_t n = l.nodes.size();
    for (std::size_t i = 0; i < n; ++i) {
      const auto& a = l.nodes[i];
      const auto& b = l.nodes[(i + 1) % n];
      if (a.corner || b.corner) continue;
      const double len = (b.p - a.p).norm();
      const double target = corners.target(c.mesh, 0.5 * (a.p + b.p));
      if (len > 1.6 * target || len < 0.4 * target) return true;
    }
  }
  return false;
}

namespace {

using Spline2 = Eigen::Spline<double, 2>;

// Resamples nodes[first..last] (inclusive, indices into an unrolled arc) keeping
// both ends; returns the new interior points.
std::vector<Point> resample_arc(const std::vector<Point>& arc, std::size_t first, std::size_t last,
                                const MeshSpec& mesh, const CornerSets& corners) {
  const std::size_t n = arc.size();
  Eigen::MatrixXd pts(2, n);
  Eigen::RowVectorXd chord(n);
  chord(0) = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    pts.col(i) = arc[i];
    if (i > 0) chord(i) = chord(i - 1) + (arc[i] - arc[i - 1]).norm();
  }
  const double total = chord(n - 1);
  const Eigen::RowVectorXd params = chord / total;
  const int degree = static_cast<int>(std::min<std::size_t>(3, n - 1));
  const Spline2 sp = Eigen::SplineFitting<Spline2>::Interpolate(pts, degree, params);
  auto curve = [&](double s) { return Point(sp(std::clamp(s / total, 0.0, 1.0))); };
  const auto s = place_nodes(curve, chord(first), chord(last), mesh, corners);
  std::vector<Point> out;
  for (std::size_t i = 1; i + 1 < s.size(); ++i) out.push_back(curve(s[i]));
  return out;
}

void restore_area(std::vector<Point>& p, const std::vector<bool>& movable, double area) {
  const std::size_t n = p.size();
  for (int it = 0; it < 3; ++it) {
    const double deficit = area - signed_area(p);
    std::vector<Point> g(n, Point::Zero());
    double norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!movable[i]) continue;
      const Point& prev = p[(i + n - 1) % n];
      const Point& next = p[(i + 1) % n];
      g[i] = 0.5 * Point(next(1) - prev(1), prev(0) - next(0));
      norm += g[i].norm();
    }
    if (norm == 0.0) return;
    const double delta = deficit / norm;
    for (std::size_t i = 0; i < n; ++i)
      if (movable[i] && g[i].norm() > 0) p[i] += delta * g[i].normalized();
  }
}

ContourLoop remesh_loop(const PatchContour& c, const ContourLoop& loop) {
  const std::size_t n = loop.nodes.size();
  const CornerSets corners = corner_sets(c, loop);
  const double area = signed_area(positions(loop));
  std::vector<std::size_t> corner_idx;
  for (std::size_t i = 0; i < n; ++i)
    if (loop.nodes[i].corner) corner_idx.push_back(i);

  std::vector<ContourNode> out;
  std::vector<bool> movable;
  if (corner_idx.empty()) {
    // Periodic: pad three nodes on each side and resample one full turn.
    const std::size_t pad = 3;
    std::vector<Point> arc;
    for (std::size_t k = 0; k < n + 2 * pad + 1; ++k) arc.push_back(loop.nodes[(k + n - pad) % n].p);
    const auto inner = resample_arc(arc, pad, pad + n, c.mesh, corners);
    out.push_back(loop.nodes[0]);
    movable.push_back(true);
    for (const auto& p : inner) {
      out.push_back({p, false});
      movable.push_back(true);
    }
  } else {
    for (std::size_t k = 0; k < corner_idx.size(); ++k) {
      const std::size_t a = corner_idx[k];
      const std::size_t b = corner_idx[(k + 1) % corner_idx.size()];
      const std::size_t len = (b + n - a) % n == 0 ? n : (b + n - a) % n;
      std::vector<Point> arc;
      for (std::size_t j = 0; j <= len; ++j) arc.push_back(loop.nodes[(a + j) % n].p);
      out.push_back(loop.nodes[a]);
      movable.push_back(false);
      if (len < 4) {
        for (std::size_t j = 1; j < len; ++j) {
          out.push_back(loop.nodes[(a + j) % n]);
          movable.push_back(false);
        }
        continue;
      }
      // Keep the neighbours of both corners.
      out.push_back(loop.nodes[(a + 1) % n]);
      movable.push_back(false);
      for (const auto& p : resample_arc(arc, 1, len - 1, c.mesh, corners)) {
        out.push_back({p, false});
        movable.push_back(true);
      }
      out.push_back(loop.nodes[(a + len - 1) % n]);
      movable.push_back(false);
    }
  }
  std::vector<Point> p;
  for (const auto& nd : out) p.push_back(nd.p);
  restore_area(p, movable, area);
  ContourLoop r;
  for (std::size_t i = 0; i < out.size(); ++i) r.nodes.push_back({p[i], out[i].corner});
  return r;
}

}  // namespace

PatchContour remesh(const PatchContour& c) {
  PatchContour out = c;
  for (auto& l : out.loops) l = remesh_loop(c, l);
  return out;
}

EvolveResult evolve(const PatchContour& c0, double T, const EvolveOptions& opt, const std::vector<Point>& tracers,
                    double sample_every) {
  if (!(T > 0.0)) throw InvalidInput("evolve needs T > 0");
  c0.validate();
  EvolveResult res;
  res.contour = c0;
  std::vector<Point> tr = tracers;
  const double t0 = c0.t;
  double elapsed = 0.0, next_sample = 0.0;
  auto sample = [&] {
    if (tr.empty()) return;
    res.tracers.push_back({elapsed, tr});
    next_sample += sample_every;
  };
  sample();
  const double direction = opt.reverse ? -1.0 : 1.0;
  while (elapsed < T * (1 - 1e-12)) {
    double dt = std::min(cfl_time_step(res.contour, opt.cfl, opt.dt_max), T - elapsed);
    if (sample_every > 0.0 && !tr.empty()) dt = std::min(dt, next_sample - elapsed);
    if (dt <= 1e-14) dt = T - elapsed;
    try {
      res.contour = step_impl(res.contour, dt, tr.empty() ? nullptr : &tr, direction);
    } catch (const NumericalFailure& e) {
      res.halted = true;
      res.diagnostic = e.what();
      return res;
    }
    elapsed += dt;
    res.contour.t = t0 + direction * elapsed;
    ++res.steps;
    if (opt.remesh && needs_remesh(res.contour)) {
      res.contour = remesh(res.contour);
      ++res.remeshes;
    }
    if (opt.snapshot_every > 0 && res.steps % opt.snapshot_every == 0) res.snapshots.push_back(res.contour);
    if (sample_every <= 0.0 || elapsed >= next_sample - 1e-12) sample();
  }
  if (!tr.empty() && res.tracers.back().t < elapsed) res.tracers.push_back({elapsed, tr});
  return res;
}

// ---- corner angle ----------------------------------------------------------------

double disc_clipped_area(const std::vector<Point>& poly, double r) {
  double a = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) a += triangle_disc_area(poly[i], poly[(i + 1) % poly.size()], r);
  return a;
}

std::vector<Point> clip_to_wedge(const std::vector<Point>& poly, double theta_a, double theta_b) {
  if (theta_b - theta_a > kPi + 1e-14) throw InvalidInput("wedge wider than pi");
  const Point na(-std::sin(theta_a), std::cos(theta_a));
  const Point nb(std::sin(theta_b), -std::cos(theta_b));
  return clip_half_plane(clip_half_plane(poly, na), nb);
}

namespace {

// Area per unit angle of the loop inside B_r along direction theta, rays from the origin.
double angular_density(const std::vector<Point>& poly, double theta, double r) {
  const Point e(std::cos(theta), std::sin(theta));
  std::vector<double> hits;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point& a = poly[i];
    const Point& b = poly[(i + 1) % n];
    if (a.norm() <= kOriginTol || b.norm() <= kOriginTol) continue;
    const double den = cross2(e, b - a);
    if (den == 0.0) continue;
    const double t = cross2(a, e) / den;  // parameter along a -> b
    if (t < 0.0 || t >= 1.0) continue;
    const double rho = cross2(a, b - a) / den;
    if (rho > 0.0) hits.push_back(rho);
  }
  std::sort(hits.begin(), hits.end());
  const double probe = 0.5 * std::min(hits.empty() ? r : hits.front(), r);
  bool inside = point_in_polygon(poly, probe * e);
  double w = 0.0, start = 0.0;
  for (double h : hits) {
    const double end = std::min(h, r);
    if (inside) w += 0.5 * (end * end - start * start);
    start = end;
    inside = !inside;
    if (h >= r) break;
  }
  if (inside && start < r) w += 0.5 * (r * r - start * start);
  return w;
}

double sector_overlap(const std::vector<Point>& poly, double a, double b, double r) {
  if (b - a > kPi) {
    const double mid = 0.5 * (a + b);
    return sector_overlap(poly, a, mid, r) + sector_overlap(poly, mid, b, r);
  }
  const auto clipped = clip_to_wedge(poly, a, b);
  return clipped.size() < 3 ? 0.0 : disc_clipped_area(clipped, r);
}

}  // namespace

std::vector<CornerAngleEstimate> measure_corner_angle(const PatchContour& c, const std::vector<double>& scales,
                                                      double reference, std::size_t loop) {
  if (loop >= c.loops.size()) throw InvalidInput("loop index out of range");
  const auto poly = positions(c.loops[loop]);
  bool has_origin = false;
  for (const auto& p : poly) has_origin = has_origin || p.norm() <= kOriginTol;
  if (!has_origin) throw InvalidInput("measure_corner_angle: the origin is not a node of the loop");

  std::vector<CornerAngleEstimate> out;
  for (double r : scales) {
    CornerAngleEstimate est;
    est.r = r;
    int inside = 0;
    double lo = kInf, hi = -kInf;
    auto note = [&](const Point& p) {
      const double phi = wrap_angle(std::atan2(p(1), p(0)) - reference);
      lo = std::min(lo, phi);
      hi = std::max(hi, phi);
    };
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Point& a = poly[i];
      const Point& b = poly[(i + 1) % n];
      if (a.norm() > kOriginTol && a.norm() <= r) {
        ++inside;
        note(a);
      }
      // Crossings of the circle |x| = r.
      const Point d = b - a;
      const double A = d.squaredNorm(), B = 2 * a.dot(d), C = a.squaredNorm() - r * r;
      const double disc = B * B - 4 * A * C;
      if (A > 0 && disc >= 0)
        for (double t : {(-B - std::sqrt(disc)) / (2 * A), (-B + std::sqrt(disc)) / (2 * A)})
          if (t >= 0 && t <= 1) note(a + t * d);
    }
    if (inside < 3) {
      est.skipped = true;
      out.push_back(est);
      continue;
    }
    est.sup_angle = hi - lo;

    // Best-fit sector: the optimal arc collects the directions where the area
    // density exceeds half of the disc's, r^2/4 per radian.
    const int K = 4096;
    const double dth = kTwoPi / K;
    std::vector<double> w(K);
    for (int k = 0; k < K; ++k) w[k] = angular_density(poly, reference - kPi + (k + 0.5) * dth, r);
    double best = -kInf, cur = 0.0;
    int best_a = 0, best_b = 0, cur_a = 0;
    for (int k = 0; k < K; ++k) {
      const double v = 2 * w[k] - 0.5 * r * r;
      if (cur <= 0.0) {
        cur = v;
        cur_a = k;
      } else {
        cur += v;
      }
      if (cur > best) {
        best = cur;
        best_a = cur_a;
        best_b = k;
      }
    }
    auto refine = [&](double in, double outside) {
      auto f = [&](double th) { return angular_density(poly, th, r) - 0.25 * r * r; };
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (in + outside);
        (f(mid) > 0 ? in : outside) = mid;
      }
      return 0.5 * (in + outside);
    };
    const double th_a = refine(reference - kPi + (best_a + 0.5) * dth, reference - kPi + (best_a - 0.5) * dth);
    const double th_b = refine(reference - kPi + (best_b + 0.5) * dth, reference - kPi + (best_b + 1.5) * dth);
    est.angle = th_b - th_a;
    est.center = 0.5 * (th_a + th_b);
    const double a_omega = disc_clipped_area(poly, r);
    const double a_sector = 0.5 * est.angle * r * r;
    const double a_both = sector_overlap(poly, th_a, th_b, r);
    est.fraction = std::max(0.0, a_omega + a_sector - 2 * a_both) / (kPi * r * r);
    out.push_back(est);
  }
  return out;
}

// ---- experiments --------------------------------------------------------------------

OddOddReport oddodd_experiment(double T, bool reversed, const std::vector<double>& x, const MeshSpec* mesh) {
  const double L = 0.5;
  const MeshSpec m = mesh ? *mesh : default_mesh(L);
  const PatchContour c = oddodd_contour(L, m, reversed ? -1.0 : 1.0);
  std::vector<Point> tracers;
  for (double xi : x) tracers.push_back(Point(xi, xi));
  OddOddReport rep;
  rep.x = x;
  rep.reversed = reversed;
  EvolveOptions opt;
  const auto res = evolve(c, T, opt, tracers, T / 20);
  if (res.halted) {
    rep.truncated = true;
    rep.diagnostic = res.diagnostic;
  }
  for (const auto& s : res.tracers) {
    bool ok = true;
    for (const auto& z : s.z) ok = ok && z(0) > 0 && z(1) > 0 && z(0) <= L && z(1) <= L;
    if (!ok) {
      rep.truncated = true;
      rep.diagnostic = "particle left the window at t = " + std::to_string(s.t);
      break;
    }
    rep.times.push_back(s.t);
    rep.z.push_back(s.z);
    std::vector<double> ah, ratio;
    for (const auto& z : s.z) {
      ah.push_back(std::log(z(1)) / std::log(z(0)));
      ratio.push_back(z(0) / z(1));
    }
    rep.alpha_hat.push_back(ah);
    rep.ratio.push_back(ratio);
  }
  return rep;
}

JumpReport jump_experiment(double half_angle, double epsilon, double gamma, const MeshSpec* mesh) {
  if (!(half_angle > 0.0 && half_angle < kPi / 2)) throw InvalidInput("half angle must lie in (0, pi/2)");
  if (!(epsilon > 0.0 && epsilon < 0.1)) throw InvalidInput("epsilon must lie in (0, 0.1)");
  const double R = 0.25;
  const MeshSpec m = mesh ? *mesh : default_mesh(R);
  const PatchContour c = sector_contour(-half_angle, half_angle, R, 2, m);
  JumpReport rep;
  rep.epsilon = epsilon;
  rep.time = gamma / std::log(1.0 / epsilon);
  rep.center0 = measure_corner_angle(c, {epsilon}, 0.0).front().center;

  IntervalProfile h;
  h.symmetry_order = 2;
  h.pieces.push_back({-half_angle, half_angle, 1.0});
  const LogMode lm = second_mode_coefficients(h);
  const double dir = 2 * lm.c * std::cos(2 * rep.center0) + 2 * lm.s * std::sin(2 * rep.center0);

  const auto res = evolve(c, rep.time);
  if (res.halted) throw NumericalFailure("jump experiment halted: " + res.diagnostic);
  const auto est = measure_corner_angle(res.contour, {epsilon}, rep.center0).front();
  if (est.skipped) throw NumericalFailure("jump experiment: too few nodes at scale epsilon");
  rep.center = est.center;
  rep.angle = est.angle;
  rep.fraction = est.fraction;
  rep.advance = (dir < 0 ? -1.0 : 1.0) * (rep.center - rep.center0);
  return rep;
}

// ---- output -------------------------------------------------------------------------

void write_contour_csv(std::ostream& os, const PatchContour& c, bool header) {
  if (header) os << "t,loop,node,x1,x2,is_corner\n";
  os.precision(17);
  for (std::size_t l = 0; l < c.loops.size(); ++l)
    for (std::size_t i = 0; i < c.loops[l].nodes.size(); ++i) {
      const auto& n = c.loops[l].nodes[i];
      os << c.t << ',' << l << ',' << i << ',' << n.p(0) << ',' << n.p(1) << ',' << (n.corner ? 1 : 0) << '\n';
    }
}

void write_contour_svg(std::ostream& os, const PatchContour& c, double extent) {
  const double size = 600.0;
  auto X = [&](const Point& p) { return size / 2 * (1 + p(0) / extent); };
  auto Y = [&](const Point& p) { return size / 2 * (1 - p(1) / extent); };
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size << "\">\n";
  const auto imgs = c.images();
  for (std::size_t j = 0; j < imgs.size(); ++j)
    for (const auto& l : c.loops) {
      const bool pos = imgs[j].sign * c.amplitude > 0;
      os << "<polygon fill=\"" << (pos ? "#c03030" : "#3050c0") << "\" fill-opacity=\"" << (j == 0 ? 0.6 : 0.3)
         << "\" stroke=\"black\" stroke-width=\"0.5\" points=\"";
      for (const auto& n : l.nodes) {
        const Point p = imgs[j].T * n.p;
        os << X(p) << ',' << Y(p) << ' ';
      }
      os << "\"/>\n";
    }
  os << "</svg>\n";
}

nlohmann::json to_json(const OddOddReport& r) {
  nlohmann::json j;
  j["x"] = r.x;
  j["times"] = r.times;
  j["alpha_hat"] = r.alpha_hat;
  j["ratio_z1_z2"] = r.ratio;
  j["reversed"] = r.reversed;
  j["truncated"] = r.truncated;
  j["diagnostic"] = r.diagnostic;
  return j;
}

nlohmann::json to_json(const JumpReport& r) {
  return {{"epsilon", r.epsilon}, {"time", r.time},   {"center0", r.center0}, {"center", r.center},
          {"angle", r.angle},     {"fraction", r.fraction}, {"advance", r.advance}};
}

nlohmann::json to_json(const CornerAngleEstimate& e) {
  return {{"r", e.r},         {"skipped", e.skipped}, {"sup_angle", e.sup_angle},
          {"angle", e.angle}, {"center", e.center},   {"fraction", e.fraction}};
}

}  // namespace vpatch
