#pragma once

// Bounded patch geometries for area quadrature: stacks of annular sectors and
// polygonal loops. Both answer the same ray query, which is all the Biot-Savart
// quadrature needs.

#include "vpatch/angular_profile.hpp"
#include "vpatch/types.hpp"

#include <variant>
#include <vector>

namespace vpatch {

/// {r_inner <= |y| <= r_outer, arg y in [theta_start, theta_end]} with constant value.
struct AnnularSector {
  double theta_start = 0.0;
  double theta_end = 0.0;
  double r_inner = 0.0;
  double r_outer = 1.0;
  double value = 1.0;
};

struct SectorStack {
  std::vector<AnnularSector> sectors;

  /// One annular sector per reconstructed arc of the profile.
  static SectorStack from_profile(const IntervalProfile& h, double r_inner, double r_outer,
                                  double amplitude = 1.0);
  static SectorStack disc(double radius, double value = 1.0);
};

/// Closed polygon, last node joined to the first. Orientation is irrelevant.
struct PolygonLoop {
  std::vector<Point> nodes;
  double value = 1.0;
};

struct PolygonPatch {
  std::vector<PolygonLoop> loops;
};

/// Sub-interval [rho_a, rho_b] of a ray x + rho e lying in one component.
struct Chord {
  double rho_a = 0.0;
  double rho_b = 0.0;
  double value = 0.0;
};

class PatchGeometry {
 public:
  PatchGeometry(SectorStack s);
  PatchGeometry(PolygonPatch p);

  /// Chords of the half-line {x + rho e : rho > 0}, e a unit vector.
  void chords(const Point& x, const Point& e, std::vector<Chord>& out) const;

  /// Ray directions from x at which the chord structure changes (vertex
  /// directions, tangencies), in [0, 2 pi).
  std::vector<double> breakpoints(const Point& x) const;

  /// Vorticity at x (sum over components containing x).
  double vorticity_at(const Point& x) const;
  double max_abs_vorticity() const;
  double support_radius() const;
  /// Signed sum of value * area.
  double circulation() const;

  const std::variant<SectorStack, PolygonPatch>& shape() const { return shape_; }

 private:
  std::variant<SectorStack, PolygonPatch> shape_;
};

/// Polygon area (shoelace), positive for counterclockwise loops.
double signed_area(const std::vector<Point>& nodes);

bool point_in_polygon(const std::vector<Point>& nodes, const Point& x);

}  // namespace vpatch
