#include "handco/polygon.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <tuple>

namespace handco {
namespace {

double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

double segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  double t = len2 > 0 ? (p - a).dot(ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return (a + t * ab - p).norm();
}

int orientation(const Vec2& a, const Vec2& b, const Vec2& c, double eps) {
  const double v = cross(b - a, c - a);
  if (v > eps) return 1;
  if (v < -eps) return -1;
  return 0;
}

bool on_segment(const Vec2& a, const Vec2& b, const Vec2& p, double eps) {
  return segment_distance(p, a, b) <= eps;
}

bool segments_touch(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  constexpr double kEps = 1e-12;
  const int o1 = orientation(a, b, c, kEps);
  const int o2 = orientation(a, b, d, kEps);
  const int o3 = orientation(c, d, a, kEps);
  const int o4 = orientation(c, d, b, kEps);
  if (o1 != o2 && o3 != o4 && o1 != 0 && o2 != 0 && o3 != 0 && o4 != 0) {
    return true;
  }
  constexpr double kTouch = 1e-9;
  return on_segment(a, b, c, kTouch) || on_segment(a, b, d, kTouch) ||
         on_segment(c, d, a, kTouch) || on_segment(c, d, b, kTouch);
}

}  // namespace

double signed_area(const Polygon2D& poly) {
  double a = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) a += cross(poly[i], poly.next(i));
  return 0.5 * a;
}

double perimeter(const Polygon2D& poly) {
  double p = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) p += (poly.next(i) - poly[i]).norm();
  return p;
}

Vec2 centroid(const Polygon2D& poly) {
  const double area = signed_area(poly);
  if (std::abs(area) < 1e-300) {
    Vec2 mean = Vec2::Zero();
    for (const auto& v : poly.vertices) mean += v;
    return mean / static_cast<double>(std::max<std::size_t>(1, poly.size()));
  }
  Vec2 c = Vec2::Zero();
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const double w = cross(poly[i], poly.next(i));
    c += (poly[i] + poly.next(i)) * w;
  }
  return c / (6.0 * area);
}

bool is_simple(const Polygon2D& poly) {
  const std::size_t n = poly.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    if ((poly.next(i) - poly[i]).norm() < 1e-12) return false;
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool adjacent = j == i + 1 || (i == 0 && j == n - 1);
      const Vec2 &a = poly[i], &b = poly.next(i), &c = poly[j], &d = poly.next(j);
      if (adjacent) {
        // Adjacent edges may only share their common vertex: reject folds.
        const Vec2& shared = (j == i + 1) ? b : a;
        const Vec2& p = (j == i + 1) ? a : b;
        const Vec2& q = (j == i + 1) ? d : c;
        const Vec2 u = p - shared, v = q - shared;
        if (std::abs(cross(u, v)) < 1e-12 && u.dot(v) > 0) return false;
        continue;
      }
      if (segments_touch(a, b, c, d)) return false;
    }
  }
  return true;
}

bool is_ccw(const Polygon2D& poly) { return signed_area(poly) > 0.0; }

bool is_convex(const Polygon2D& poly) {
  const std::size_t n = poly.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly.next(i);
    const Vec2& c = poly[(i + 2) % n];
    if (cross(b - a, c - b) < -1e-9) return false;
  }
  return true;
}

bool contains(const Polygon2D& poly, const Vec2& p, double tol) {
  if (distance_to_boundary(poly, p) <= tol) return true;
  bool inside = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[j];
    if ((a.y() > p.y()) != (b.y() > p.y())) {
      const double x = (b.x() - a.x()) * (p.y() - a.y()) / (b.y() - a.y()) + a.x();
      if (p.x() < x) inside = !inside;
    }
  }
  return inside;
}

double distance_to_boundary(const Polygon2D& poly, const Vec2& p) {
  double d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < poly.size(); ++i) {
    d = std::min(d, segment_distance(p, poly[i], poly.next(i)));
  }
  return d;
}

std::optional<double> ray_exit_distance(const Polygon2D& poly, const Vec2& origin,
                                        const Vec2& dir) {
  std::optional<double> best;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2& a = poly[i];
    const Vec2 e = poly.next(i) - a;
    const double denom = cross(dir, e);
    if (std::abs(denom) < 1e-15) continue;
    const Vec2 w = a - origin;
    const double t = cross(w, e) / denom;
    const double u = cross(w, dir) / denom;
    if (t >= 0.0 && u >= -1e-12 && u <= 1.0 + 1e-12) {
      if (!best || t > *best) best = t;
    }
  }
  return best;
}

OutlineSample sample_outline(const Polygon2D& poly, double s) {
  const std::size_t n = poly.size();
  if (n < 3) throw std::invalid_argument("sample_outline: polygon needs >= 3 vertices");
  s -= std::floor(s);
  const double target = s * perimeter(poly);
  double walked = 0.0;
  constexpr double kVertexSnap = 1e-9;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 e = poly.next(i) - poly[i];
    const double len = e.norm();
    if (target <= walked + len || i + 1 == n) {
      const double t = std::clamp(target - walked, 0.0, len);
      const Vec2 tangent = e / len;
      OutlineSample out;
      out.point = poly[i] + t * tangent;
      Vec2 edge_normal(tangent.y(), -tangent.x());
      // At a vertex, heading follows the bisector of the two incident edges.
      auto bisect = [&](std::size_t v) {
        const Vec2 prev = (poly[v] - poly[(v + n - 1) % n]).normalized();
        const Vec2 next = (poly.next(v) - poly[v]).normalized();
        const Vec2 t_avg = (prev + next).normalized();
        return std::pair<Vec2, Vec2>{t_avg, Vec2(t_avg.y(), -t_avg.x())};
      };
      if (t <= kVertexSnap) {
        std::tie(out.tangent, out.normal) = bisect(i);
      } else if (len - t <= kVertexSnap) {
        std::tie(out.tangent, out.normal) = bisect((i + 1) % n);
      } else {
        out.tangent = tangent;
        out.normal = edge_normal;
      }
      return out;
    }
    walked += len;
  }
  throw std::logic_error("sample_outline: unreachable");
}

Polygon2D prune_collinear(const Polygon2D& poly, double tol) {
  std::vector<Vec2> v = poly.vertices;
  bool changed = true;
  while (changed && v.size() > 3) {
    changed = false;
    for (std::size_t i = 0; i < v.size() && v.size() > 3; ++i) {
      const Vec2& a = v[(i + v.size() - 1) % v.size()];
      const Vec2& b = v[i];
      const Vec2& c = v[(i + 1) % v.size()];
      const double base = (c - a).norm();
      const bool duplicate = (b - a).norm() < tol;
      const bool collinear =
          base > 0 && std::abs(cross(c - a, b - a)) / base < tol && (b - a).dot(c - b) >= 0;
      if (duplicate || collinear) {
        v.erase(v.begin() + static_cast<std::ptrdiff_t>(i));
        changed = true;
        break;
      }
    }
  }
  return Polygon2D{std::move(v)};
}

Polygon2D clip_convex(const Polygon2D& subject, const Polygon2D& clip) {
  std::vector<Vec2> out = subject.vertices;
  for (std::size_t i = 0; i < clip.size() && !out.empty(); ++i) {
    const Vec2& a = clip[i];
    const Vec2& b = clip.next(i);
    const Vec2 e = b - a;
    auto side = [&](const Vec2& p) { return cross(e, p - a); };
    std::vector<Vec2> in = std::move(out);
    out.clear();
    for (std::size_t k = 0; k < in.size(); ++k) {
      const Vec2& p = in[k];
      const Vec2& q = in[(k + 1) % in.size()];
      const double sp = side(p), sq = side(q);
      if (sp >= 0) out.push_back(p);
      if ((sp >= 0) != (sq >= 0)) {
        const double t = sp / (sp - sq);
        out.push_back(p + t * (q - p));
      }
    }
  }
  // Drop consecutive duplicates created by clipping through vertices.
  std::vector<Vec2> dedup;
  for (const auto& p : out) {
    if (dedup.empty() || (p - dedup.back()).norm() > 1e-12) dedup.push_back(p);
  }
  while (dedup.size() > 1 && (dedup.front() - dedup.back()).norm() <= 1e-12) dedup.pop_back();
  return Polygon2D{std::move(dedup)};
}

}  // namespace handco
