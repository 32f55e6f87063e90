#pragma once

// Contour dynamics: boundary nodes advected by
//   u(x) = -(omega / 2pi) sum over loops of the integral of ln|x - y| dy
// along counterclockwise loops, with exact per-segment integrals. Only a
// fundamental piece is stored; symmetry images enter through the velocity.

#include "vpatch/patch_geometry.hpp"
#include "vpatch/types.hpp"

#include <json.hpp>

#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace vpatch {

struct ContourNode {
  Point p = Point::Zero();
  bool corner = false;
};

/// Counterclockwise closed loop; the last node joins the first.
struct ContourLoop {
  std::vector<ContourNode> nodes;
};

enum class ContourSymmetry { rotational, odd_odd };

/// Node spacing targets. Away from pinned corners the spacing is h_max; toward
/// a pinned corner it grades geometrically, h ~ h0 + (ratio - 1) * distance.
struct MeshSpec {
  double h0 = 1e-4;
  double ratio = 1.25;
  double h_max = 0.02;
  /// Spacing floor near corners that are not pinned.
  double h_corner = 0.005;

  double target(double dist_pinned, double dist_corner) const;
};

/// Orthogonal map and vorticity sign of one symmetry image.
struct ContourImage {
  Mat2 T;
  double sign;
};

struct PatchContour {
  std::vector<ContourLoop> loops;
  /// m-fold rotation images (rotational) or the four odd-odd reflections.
  int symmetry_order = 1;
  ContourSymmetry symmetry = ContourSymmetry::rotational;
  double amplitude = 1.0;
  /// Corner nodes at the origin have zero velocity. Set by symmetry (m >= 2 or
  /// odd-odd); may be forced for an unrolled symmetric contour.
  std::optional<bool> pin_origin;
  MeshSpec mesh;
  double t = 0.0;

  bool pins_origin() const;
  bool is_pinned(const ContourNode& n) const;
  std::vector<ContourImage> images() const;

  /// Loops closed and counterclockwise, at least three nodes, no self-intersection.
  void validate() const;

  /// Area of the stored loops (one fundamental piece).
  double area() const;
  std::size_t node_count() const;

  /// Explicit contour with every image loop stored, symmetry_order 1.
  PatchContour unrolled() const;
  /// Polygon geometry of the full patch (images included) for area quadrature.
  PatchGeometry geometry() const;
};

// ---- builders ------------------------------------------------------------------

/// Regular n-gon of radius R, no corners, no symmetry.
PatchContour disc_contour(double R, int n, double amplitude = 1.0);

/// Truncated sector {0 < |x| < R, theta_a < arg x < theta_b}, corner pinned at
/// the origin, m-fold images. Edges graded toward the origin.
PatchContour sector_contour(double theta_a, double theta_b, double R, int m, const MeshSpec& mesh,
                            double amplitude = 1.0);

/// Petal r = R sin(m theta), theta in [0, pi/m], with its m-fold images.
/// Corner angle pi/m at the origin.
PatchContour petal_contour(int m, double R, const MeshSpec& mesh, double amplitude = 1.0);

/// Odd-odd contour equal to {0 <= x1 <= x2 <= L} in the first quadrant.
PatchContour oddodd_contour(double L, const MeshSpec& mesh, double amplitude = 1.0);

MeshSpec default_mesh(double domain_scale);

// ---- velocity ------------------------------------------------------------------

/// Integral of ln|x - y| dy over the segment [a, b], exact.
Point segment_log_integral(const Point& x, const Point& a, const Point& b);

Velocity contour_velocity(const PatchContour& c, const Point& x);
std::vector<Velocity> contour_velocity(const PatchContour& c, const std::vector<Point>& at);

// ---- evolution -----------------------------------------------------------------

struct SelfIntersection {
  std::size_t loop_a, seg_a, loop_b, seg_b;
};
std::optional<SelfIntersection> find_self_intersection(const PatchContour& c);

/// One RK4 step of all nodes and of the optional passive tracers.
/// Throws NumericalFailure naming the crossing segments if the result self-intersects.
PatchContour step(const PatchContour& c, double dt, std::vector<Point>* tracers = nullptr);

/// dt <= cfl * min over unpinned nodes of (local spacing / |u|), capped at dt_max.
double cfl_time_step(const PatchContour& c, double cfl, double dt_max);

/// Whether some segment violates the spacing targets by more than the tolerance band.
bool needs_remesh(const PatchContour& c);

/// Spline resampling to the spacing targets between corners. Corner nodes and
/// their neighbours are kept, so the edge directions at corners are unchanged,
/// and nodes are shifted along the normal to restore each loop's area.
PatchContour remesh(const PatchContour& c);

struct EvolveOptions {
  double cfl = 0.25;
  double dt_max = 0.02;
  bool remesh = true;
  /// Snapshots every this many steps; 0 for none.
  int snapshot_every = 0;
  /// Run with negated velocity (time reversal).
  bool reverse = false;
};

struct TracerSample {
  double t;
  std::vector<Point> z;
};

struct EvolveResult {
  PatchContour contour;
  std::vector<TracerSample> tracers;
  std::vector<PatchContour> snapshots;
  int steps = 0;
  int remeshes = 0;
  bool halted = false;
  std::string diagnostic;
};

EvolveResult evolve(const PatchContour& c0, double T, const EvolveOptions& opt = {},
                    const std::vector<Point>& tracers = {}, double sample_every = 0.0);

// ---- corner angle ----------------------------------------------------------------

struct CornerAngleEstimate {
  double r = 0.0;
  bool skipped = false;  // fewer than three nodes inside B_r
  /// Largest angle between boundary directions in B_r (nodes and circle crossings).
  double sup_angle = 0.0;
  /// Best-fit sector minimising |(Omega delta S) n B_r| / |B_r|.
  double angle = 0.0;
  double center = 0.0;
  double fraction = 0.0;
};

/// Corner at the origin of loop `loop`. `reference` is a direction inside the
/// corner used to unwrap angles.
std::vector<CornerAngleEstimate> measure_corner_angle(const PatchContour& c, const std::vector<double>& scales,
                                                      double reference, std::size_t loop = 0);

/// Area of polygon n disc(0, r), signed by orientation.
double disc_clipped_area(const std::vector<Point>& poly, double r);
/// Polygon clipped to the wedge theta_a <= arg <= theta_b (width at most pi).
std::vector<Point> clip_to_wedge(const std::vector<Point>& poly, double theta_a, double theta_b);

// ---- experiments -------------------------------------------------------------------

struct OddOddReport {
  std::vector<double> x;           // initial diagonal positions
  std::vector<double> times;
  std::vector<std::vector<Point>> z;  // z[n][i]
  std::vector<std::vector<double>> alpha_hat;
  std::vector<std::vector<double>> ratio;  // z1 / z2
  bool reversed = false;
  bool truncated = false;
  std::string diagnostic;
};

/// Odd-odd triangle {0 <= x1 <= x2 <= 1/2} evolved for time T (reversed sign
/// for the backward run), tracking diagonal particles.
OddOddReport oddodd_experiment(double T, bool reversed, const std::vector<double>& x = {1e-2, 1e-3, 1e-4},
                               const MeshSpec* mesh = nullptr);

struct JumpReport {
  double epsilon = 0.0;
  double time = 0.0;
  double center0 = 0.0;
  double center = 0.0;
  double angle = 0.0;
  double fraction = 0.0;
  /// Rotation toward the stretching separatrix of the initial log gradient.
  double advance = 0.0;
};

/// Two-fold sector of half-angle `half_angle` about the x1-axis, radius 1/4,
/// evolved to t = gamma / ln(1/eps); best-fit sector at scale eps.
JumpReport jump_experiment(double half_angle, double epsilon, double gamma, const MeshSpec* mesh = nullptr);

// ---- output ----------------------------------------------------------------------

void write_contour_csv(std::ostream& os, const PatchContour& c, bool header = true);
void write_contour_svg(std::ostream& os, const PatchContour& c, double extent);
nlohmann::json to_json(const OddOddReport& r);
nlohmann::json to_json(const JumpReport& r);
nlohmann::json to_json(const CornerAngleEstimate& e);

}  // namespace vpatch
