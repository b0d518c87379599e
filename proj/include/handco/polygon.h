#pragma once

#include <optional>
#include <vector>

#include <Eigen/Geometry>

namespace handco {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Pose = Eigen::Isometry3d;

/// Planar polygon in millimetres. Vertices are ordered counter-clockwise and
/// the closing edge (last -> first) is implicit.
struct Polygon2D {
  std::vector<Vec2> vertices;

  std::size_t size() const { return vertices.size(); }
  const Vec2& operator[](std::size_t i) const { return vertices[i]; }
  const Vec2& next(std::size_t i) const {
    return vertices[(i + 1) % vertices.size()];
  }
};

double signed_area(const Polygon2D& poly);
double perimeter(const Polygon2D& poly);
Vec2 centroid(const Polygon2D& poly);

/// True when no two non-adjacent edges touch and no adjacent edges overlap.
bool is_simple(const Polygon2D& poly);
bool is_ccw(const Polygon2D& poly);
bool is_convex(const Polygon2D& poly);

/// Inside-or-on-boundary test; points within `tol` of an edge count as inside.
bool contains(const Polygon2D& poly, const Vec2& p, double tol = 1e-9);
double distance_to_boundary(const Polygon2D& poly, const Vec2& p);

/// Distance along `dir` (unit) from `origin` to the last boundary crossing of
/// the ray. For an interior origin of a convex polygon this is the exit point.
std::optional<double> ray_exit_distance(const Polygon2D& poly,
                                        const Vec2& origin, const Vec2& dir);

/// Point at normalized arc-length `s` in [0, 1) measured from vertex 0, CCW.
struct OutlineSample {
  Vec2 point;
  Vec2 tangent;  // unit, CCW direction
  Vec2 normal;   // unit, outward
};
OutlineSample sample_outline(const Polygon2D& poly, double s);

/// Removes vertices whose neighbours make them collinear within `tol` mm.
Polygon2D prune_collinear(const Polygon2D& poly, double tol = 1e-6);

/// Sutherland-Hodgman clip of `subject` against a convex CCW `clip` polygon.
Polygon2D clip_convex(const Polygon2D& subject, const Polygon2D& clip);

}  // namespace handco
