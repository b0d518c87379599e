#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "handco/polygon.h"

namespace handco {

/// Indexed triangle mesh in millimetres. Triangles wind counter-clockwise when
/// viewed from outside.
struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> triangles;

  bool empty() const { return triangles.empty(); }
};

/// A mesh that is the boundary of a convex polytope.
struct ConvexPiece {
  TriMesh mesh;
};

struct MassProps {
  double mass = 0.0;          // kg
  Vec3 com = Vec3::Zero();    // mm
  Mat3 inertia = Mat3::Zero();  // kg mm^2, about com
};

/// Default body density (PLA print), kg/mm^3.
inline constexpr double kDefaultDensity = 1.15e-6;

/// Ear-clipping triangulation of a simple CCW polygon. Returns vertex-index
/// triples into `poly.vertices`. Throws std::invalid_argument on failure.
std::vector<std::array<int, 3>> triangulate(const Polygon2D& poly);

/// Closed prism between z = z0 and z = z0 + height.
TriMesh extrude_polygon(const Polygon2D& poly, double height, double z0 = 0.0);

bool watertight_check(const TriMesh& m);
double signed_volume(const TriMesh& m);
double triangle_area(const TriMesh& m, int tri);

/// Exact polyhedral mass properties. Throws on non-watertight input.
MassProps mass_props(const TriMesh& m, double density = kDefaultDensity);

/// Convex hull of a small point set (brute-force supporting planes; intended
/// for tens of points). Coincident points are merged within `eps`.
ConvexPiece convex_hull(std::span<const Vec3> points, double eps = 1e-9);

/// Every vertex lies behind every face plane within `tol` and the volume is
/// positive.
bool is_convex(const TriMesh& m, double tol = 1e-6);

/// Largest distance from a mesh vertex to the hull of the mesh's vertex set
/// measured outward through the mesh's own face planes (0 for a convex mesh).
double hull_deviation(const TriMesh& m);

TriMesh transformed(const TriMesh& m, const Pose& pose);
TriMesh scaled(const TriMesh& m, const Vec3& scale);
void append(TriMesh& dst, const TriMesh& src);

struct Aabb {
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = Vec3::Constant(-std::numeric_limits<double>::infinity());
  Vec3 extent() const { return hi - lo; }
};
Aabb bounding_box(const TriMesh& m);

/// Binary STL, little-endian. Vertices are stored as f32; facet normals are
/// computed from the f32-rounded vertices so that a write/read/write cycle is
/// byte-stable.
std::string stl_bytes(const TriMesh& m, std::string_view header = "handco");
void write_stl(const TriMesh& m, const std::filesystem::path& path);
TriMesh parse_stl(std::string_view bytes);
TriMesh read_stl(const std::filesystem::path& path);

}  // namespace handco
