#include "handco/surface.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>

#include <boost/geometry.hpp>
#include <boost/geometry/geometries/multi_polygon.hpp>
#include <boost/geometry/geometries/point_xy.hpp>
#include <boost/geometry/geometries/polygon.hpp>

namespace handco {
namespace bg = boost::geometry;
namespace {

using BPoint = bg::model::d2::point_xy<double>;
using BPoly = bg::model::polygon<BPoint, false, true>;
using BMulti = bg::model::multi_polygon<BPoly>;

BPoly to_boost(const Polygon2D& poly) {
  BPoly out;
  for (const auto& v : poly.vertices) bg::append(out.outer(), BPoint(v.x(), v.y()));
  bg::append(out.outer(), BPoint(poly[0].x(), poly[0].y()));
  bg::correct(out);
  return out;
}

// Welds 2-D points closer than `tol` into one vertex id.
class VertexWelder {
 public:
  explicit VertexWelder(double tol) : tol_(tol) {}

  int id(const Vec2& p, std::vector<Vec3>& vertices) {
    const auto key = cell_of(p);
    for (long dx = -1; dx <= 1; ++dx) {
      for (long dy = -1; dy <= 1; ++dy) {
        auto it = buckets_.find({key.first + dx, key.second + dy});
        if (it == buckets_.end()) continue;
        for (int v : it->second) {
          if ((vertices[v].head<2>() - p).norm() <= tol_) return v;
        }
      }
    }
    const int v = static_cast<int>(vertices.size());
    vertices.emplace_back(p.x(), p.y(), 0.0);
    buckets_[key].push_back(v);
    return v;
  }

 private:
  std::pair<long, long> cell_of(const Vec2& p) const {
    return {static_cast<long>(std::floor(p.x() / (4 * tol_))),
            static_cast<long>(std::floor(p.y() / (4 * tol_)))};
  }

  double tol_;
  std::map<std::pair<long, long>, std::vector<int>> buckets_;
};

Polygon2D ring_polygon(const PadMesh& pad, const std::vector<int>& ring) {
  Polygon2D poly;
  for (int v : ring) poly.vertices.push_back(pad.vertices[v].head<2>());
  return poly;
}

}  // namespace

double characteristic_length(const Polygon2D& region) {
  const Vec2 c = centroid(region);
  double l = 0.0;
  for (const auto& v : region.vertices) l = std::max(l, (v - c).norm());
  return l;
}

Vec2 kernel_center(const Polygon2D& region, const SurfaceKernel& k) {
  const Vec2 c = centroid(region);
  if (k.center_offset == 0.0) return c;
  const double theta = k.center_angle_deg * std::numbers::pi / 180.0;
  const Vec2 u(std::cos(theta), std::sin(theta));
  const double d = ray_exit_distance(region, c, u).value_or(0.0);
  return c + k.center_offset * d * u;
}

double displacement(const PadSpec& pad, const Polygon2D& region, const Vec2& p) {
  if (pad.max_height <= 0.0) return 0.0;
  const double l = characteristic_length(region);
  double sum = 0.0;
  for (const auto& k : pad.kernels) {
    if (k.intensity == 0.0) continue;
    const double s = k.spread * l;
    const double d2 = (p - kernel_center(region, k)).squaredNorm();
    sum += k.intensity * std::exp(-d2 / (2.0 * s * s));
  }
  return std::min(pad.max_height * sum, pad.max_height);
}

PadMesh flat_pad(const Polygon2D& footprint, int resolution) {
  return flat_pad(footprint, footprint, resolution);
}

PadMesh flat_pad(const Polygon2D& footprint, const Polygon2D& kernel_region, int resolution) {
  if (resolution < 4) throw std::invalid_argument("flat_pad: resolution must be >= 4");
  if (!is_simple(footprint) || !is_ccw(footprint)) {
    throw std::invalid_argument("flat_pad: footprint must be a simple CCW polygon");
  }
  PadMesh pad;
  pad.footprint = footprint;
  pad.kernel_region = kernel_region;

  Vec2 lo = footprint[0], hi = footprint[0];
  for (const auto& v : footprint.vertices) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  const double cell = (hi.x() - lo.x()) / resolution;
  const int nx = resolution;
  const int ny = std::max(1, static_cast<int>(std::ceil((hi.y() - lo.y()) / cell - 1e-9)));
  const BPoly region = to_boost(footprint);
  const bool convex_footprint = is_convex(footprint);
  VertexWelder welder(1e-7 * std::max(1.0, cell));

  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const double x0 = lo.x() + i * cell, x1 = (i + 1 == nx) ? hi.x() : lo.x() + (i + 1) * cell;
      const double y0 = lo.y() + j * cell, y1 = std::min(hi.y(), lo.y() + (j + 1) * cell);
      if (y1 <= y0) continue;
      const Polygon2D square{{{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}};
      std::vector<Polygon2D> pieces;
      if (convex_footprint) {
        pieces.push_back(clip_convex(square, footprint));
      } else {
        BMulti out;
        bg::intersection(to_boost(square), region, out);
        for (const auto& bp : out) {
          Polygon2D piece;
          const auto& ring = bp.outer();
          for (std::size_t k = 0; k + 1 < ring.size(); ++k) piece.vertices.emplace_back(ring[k].x(), ring[k].y());
          if (signed_area(piece) < 0) std::reverse(piece.vertices.begin(), piece.vertices.end());
          pieces.push_back(std::move(piece));
        }
      }
      for (auto& piece : pieces) {
        if (piece.size() < 3 || signed_area(piece) <= 1e-9) continue;
        std::vector<int> ring;
        for (const auto& v : piece.vertices) {
          const int id = welder.id(v, pad.vertices);
          if (ring.empty() || ring.back() != id) ring.push_back(id);
        }
        while (ring.size() > 1 && ring.front() == ring.back()) ring.pop_back();
        if (ring.size() < 3) continue;
        pad.cells.push_back(std::move(ring));
      }
    }
  }
  pad.normals.assign(pad.vertices.size(), Vec3::UnitZ());
  pad.boundary.resize(pad.vertices.size());
  for (std::size_t v = 0; v < pad.vertices.size(); ++v) {
    pad.boundary[v] = distance_to_boundary(footprint, pad.vertices[v].head<2>()) <= 1e-6;
  }
  for (const auto& ring : pad.cells) {
    const Polygon2D poly = ring_polygon(pad, ring);
    for (const auto& t : triangulate(poly)) {
      pad.triangles.push_back({ring[t[0]], ring[t[1]], ring[t[2]]});
    }
  }
  return pad;
}

PadMesh deform_pad(const PadMesh& base, const PadSpec& pad) {
  PadMesh out = base;
  for (std::size_t v = 0; v < out.vertices.size(); ++v) {
    if (out.boundary[v]) continue;
    const double h = displacement(pad, out.kernel_region, base.vertices[v].head<2>());
    out.vertices[v] = base.vertices[v] + h * base.normals[v];
  }
  return out;
}

std::vector<ConvexPiece> decompose_pad(const PadMesh& deformed, double depth) {
  if (!(depth > 0)) throw std::invalid_argument("decompose_pad: depth must be positive");
  std::vector<ConvexPiece> pieces;
  auto prism = [&](const std::vector<int>& ids) {
    std::vector<Vec3> pts;
    pts.reserve(2 * ids.size());
    for (int v : ids) {
      const Vec3& p = deformed.vertices[v];
      pts.emplace_back(p.x(), p.y(), -depth);
      pts.push_back(p);
    }
    pieces.push_back(convex_hull(pts));
  };
  for (const auto& ring : deformed.cells) {
    const Polygon2D poly = ring_polygon(deformed, ring);
    if (std::abs(signed_area(poly)) <= 1e-9) continue;
    if (is_convex(poly)) {
      prism(ring);
    } else {
      for (const auto& t : triangulate(poly)) prism({ring[t[0]], ring[t[1]], ring[t[2]]});
    }
  }
  return pieces;
}

TriMesh pad_solid(const PadMesh& deformed, double depth) {
  TriMesh m;
  const int n = static_cast<int>(deformed.vertices.size());
  m.vertices = deformed.vertices;
  for (const auto& v : deformed.vertices) m.vertices.emplace_back(v.x(), v.y(), -depth);
  m.triangles = deformed.triangles;
  for (const auto& t : deformed.triangles) m.triangles.push_back({t[0] + n, t[2] + n, t[1] + n});
  // Boundary edges of the top surface run CCW around the footprint.
  std::map<std::pair<int, int>, int> count;
  for (const auto& t : deformed.triangles) {
    for (int k = 0; k < 3; ++k) ++count[{t[k], t[(k + 1) % 3]}];
  }
  for (const auto& [e, c] : count) {
    if (count.contains({e.second, e.first})) continue;
    const int a = e.first, b = e.second;
    m.triangles.push_back({a, a + n, b + n});
    m.triangles.push_back({a, b + n, b});
  }
  return m;
}

}  // namespace handco
