#pragma once

#include <vector>

#include "handco/mesh.h"
#include "handco/polygon.h"

namespace handco {

/// Gaussian bump. Centre is placed by angle and fractional offset from the
/// region centroid towards its boundary; spread is relative to the region's
/// characteristic length.
struct SurfaceKernel {
  double center_angle_deg = 0.0;
  double center_offset = 0.0;
  double spread = 0.1;
  double intensity = 0.0;
};

struct PadSpec {
  double max_height = 0.0;  // mm
  std::vector<SurfaceKernel> kernels;
  int resolution = 16;  // grid cells across the pad width
};

/// Grid surface over a planar face. Vertex z holds the height above the face
/// plane; normals are the undeformed surface normals.
struct PadMesh {
  Polygon2D footprint;      // face the grid covers
  Polygon2D kernel_region;  // region kernels are parameterized in
  std::vector<Vec3> vertices;
  std::vector<Vec3> normals;
  std::vector<bool> boundary;
  std::vector<std::array<int, 3>> triangles;
  std::vector<std::vector<int>> cells;  // CCW vertex ring per clipped cell piece
};

/// Max centroid-to-boundary distance.
double characteristic_length(const Polygon2D& region);

Vec2 kernel_center(const Polygon2D& region, const SurfaceKernel& k);

/// min(H * sum_k r_k exp(-|p - c_k|^2 / (2 (sigma_k L)^2)), H)
double displacement(const PadSpec& pad, const Polygon2D& region, const Vec2& p);

/// Flat grid of `resolution` cells across `footprint`'s width, cells clipped
/// to the footprint. `kernel_region` defaults to the footprint.
PadMesh flat_pad(const Polygon2D& footprint, int resolution);
PadMesh flat_pad(const Polygon2D& footprint, const Polygon2D& kernel_region, int resolution);

/// Displaces every interior vertex along its normal; boundary vertices stay
/// pinned at zero height.
PadMesh deform_pad(const PadMesh& base, const PadSpec& pad);

/// One convex prism per cell piece (per triangle where the clipped cell is not
/// convex) spanning from z = -depth up to the deformed surface.
std::vector<ConvexPiece> decompose_pad(const PadMesh& deformed, double depth);

/// Closed solid: deformed grid on top, flat copy at z = -depth below, and
/// walls along the footprint boundary.
TriMesh pad_solid(const PadMesh& deformed, double depth);

}  // namespace handco
