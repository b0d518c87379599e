#include "handco/palm.h"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <boost/geometry.hpp>
#include <boost/geometry/geometries/point_xy.hpp>
#include <boost/geometry/geometries/polygon.hpp>
#include <boost/geometry/geometries/multi_polygon.hpp>

#include "handco/errors.h"

namespace handco {
namespace bg = boost::geometry;
namespace {

using BPoint = bg::model::d2::point_xy<double>;
using BPoly = bg::model::polygon<BPoint, /*clockwise=*/false, /*closed=*/true>;
using BMulti = bg::model::multi_polygon<BPoly>;

constexpr double kDeg = std::numbers::pi / 180.0;

BPoly to_boost(const Polygon2D& poly) {
  BPoly out;
  for (const auto& v : poly.vertices) bg::append(out.outer(), BPoint(v.x(), v.y()));
  bg::append(out.outer(), BPoint(poly[0].x(), poly[0].y()));
  bg::correct(out);
  return out;
}

Polygon2D from_ring(const BPoly::ring_type& ring) {
  Polygon2D out;
  for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
    out.vertices.emplace_back(ring[i].x(), ring[i].y());
  }
  if (signed_area(out) < 0) std::reverse(out.vertices.begin(), out.vertices.end());
  return out;
}

bool contains_all(const Polygon2D& poly, std::span<const BaseFrame> frames) {
  for (const auto& f : frames) {
    if (!contains(poly, f.origin.head<2>(), 1e-6)) return false;
  }
  return true;
}

// Drops one endpoint of every edge shorter than `min_feature` unless that
// would break simplicity, lose a base origin or cut below `area_floor`.
Polygon2D collapse_short_edges(Polygon2D poly, std::span<const BaseFrame> frames,
                               double min_feature, double area_floor) {
  bool changed = true;
  while (changed && poly.size() > 3) {
    changed = false;
    for (std::size_t i = 0; i < poly.size() && !changed; ++i) {
      if ((poly.next(i) - poly[i]).norm() >= min_feature) continue;
      const std::size_t j = (i + 1) % poly.size();
      // Candidates: drop either endpoint, or merge both into the midpoint.
      for (int move = 0; move < 3 && !changed; ++move) {
        Polygon2D trial = poly;
        if (move == 2) trial.vertices[i] = 0.5 * (poly[i] + poly[j]);
        trial.vertices.erase(trial.vertices.begin() + static_cast<std::ptrdiff_t>(move == 1 ? i : j));
        if (trial.size() >= 3 && is_simple(trial) && signed_area(trial) >= area_floor &&
            contains_all(trial, frames)) {
          poly = std::move(trial);
          changed = true;
        }
      }
    }
  }
  return poly;
}

}  // namespace

Pose BaseFrame::pose() const {
  Pose p = Pose::Identity();
  p.linear() = rotation.toRotationMatrix();
  p.translation() = origin;
  return p;
}

Polygon2D build_outline(double size, int sides, double aspect) {
  if (sides < 3) throw std::invalid_argument("build_outline: sides must be >= 3");
  if (!(size > 0)) throw std::invalid_argument("build_outline: size must be positive");
  if (!(aspect > 0)) throw std::invalid_argument("build_outline: aspect must be positive");
  const double a = size / 2.0;
  const double b = size / (2.0 * aspect);
  Polygon2D poly;
  for (int k = 0; k < sides; ++k) {
    const double t = 2.0 * std::numbers::pi * k / sides;
    poly.vertices.emplace_back(a * std::cos(t), b * std::sin(t));
  }
  return poly;
}

std::vector<BaseFrame> place_bases(const Polygon2D& outline,
                                   std::span<const BaseAssignment> assignments, double top_z) {
  std::vector<BaseFrame> frames;
  frames.reserve(assignments.size());
  for (const auto& a : assignments) {
    const OutlineSample s = sample_outline(outline, a.arc);
    const Vec2 p = s.point + a.pose.normal_offset * s.normal + a.pose.side_offset * s.tangent;
    const Eigen::Rotation2Dd turn(a.pose.angle_deg * kDeg);
    const Vec2 h = turn * s.normal;
    Mat3 r;
    r.col(0) = Vec3(h.x(), h.y(), 0.0);
    r.col(2) = Vec3::UnitZ();
    r.col(1) = r.col(2).cross(r.col(0));
    BaseFrame f;
    f.digit = a.digit;
    f.origin = Vec3(p.x(), p.y(), top_z);
    f.rotation = Eigen::Quaterniond(r).normalized();
    f.anchor = s.point;
    f.width = a.pose.width;
    frames.push_back(std::move(f));
  }
  return frames;
}

Polygon2D finalize_outline(const Polygon2D& outline, std::span<const BaseFrame> frames,
                           double min_feature) {
  constexpr double kOverlap = 2.0;     // mm the bridge reaches back into the palm
  constexpr double kTipMargin = 0.01;  // mm past the frame; boolean ops move edges by ~1e-6
  BMulti merged;
  merged.push_back(to_boost(outline));
  for (const auto& f : frames) {
    const Vec2 span = f.origin.head<2>() - f.anchor;
    const double len = span.norm();
    if (len < 1e-9) continue;
    const Vec2 u = span / len;
    const Vec2 w(-u.y(), u.x());
    const Vec2 start = f.anchor - kOverlap * u;
    // Short bridges are lengthened so the step they leave is not itself a
    // sub-minimum feature.
    const Vec2 end = f.anchor + std::max(len + kTipMargin, 1.5 * min_feature) * u;
    const double hw = f.width / 2.0;
    Polygon2D rect{{start - hw * w, end - hw * w, end + hw * w, start + hw * w}};
    BMulti out;
    bg::union_(merged, to_boost(rect), out);
    merged = std::move(out);
  }
  if (merged.size() != 1) {
    throw InfeasibleDesign("finalize_outline: palm outline is disconnected (" +
                           std::to_string(merged.size()) + " pieces)");
  }
  Polygon2D result = prune_collinear(from_ring(merged.front().outer()), 1e-6);
  result = collapse_short_edges(std::move(result), frames, min_feature, signed_area(outline));
  if (!is_simple(result) || !is_ccw(result)) {
    throw InfeasibleDesign("finalize_outline: union is not a simple polygon");
  }
  if (!contains_all(result, frames)) {
    throw InfeasibleDesign("finalize_outline: a base origin lies outside the palm");
  }
  return result;
}

}  // namespace handco
