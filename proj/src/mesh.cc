#include "handco/mesh.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

namespace handco {
namespace {

double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

bool point_in_triangle(const Vec2& p, const Vec2& a, const Vec2& b, const Vec2& c) {
  const double d1 = cross2(b - a, p - a);
  const double d2 = cross2(c - b, p - b);
  const double d3 = cross2(a - c, p - c);
  return d1 >= -1e-12 && d2 >= -1e-12 && d3 >= -1e-12;
}

struct Plane {
  Vec3 n;
  double d;
};

// Andrew's monotone chain on 2-D coordinates; returns indices in CCW order
// with collinear points removed.
std::vector<int> hull_2d(const std::vector<Vec2>& pts, const std::vector<int>& ids) {
  std::vector<int> order = ids;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const Vec2 &p = pts[a], &q = pts[b];
    return p.x() < q.x() || (p.x() == q.x() && p.y() < q.y());
  });
  if (order.size() < 3) return order;
  std::vector<int> h(2 * order.size());
  std::size_t k = 0;
  auto turn = [&](int o, int a, int b) { return cross2(pts[a] - pts[o], pts[b] - pts[o]); };
  for (int id : order) {
    while (k >= 2 && turn(h[k - 2], h[k - 1], id) <= 1e-12) --k;
    h[k++] = id;
  }
  for (std::size_t i = order.size() - 1, t = k + 1; i-- > 0;) {
    const int id = order[i];
    while (k >= t && turn(h[k - 2], h[k - 1], id) <= 1e-12) --k;
    h[k++] = id;
  }
  h.resize(k - 1);
  return h;
}

std::vector<Plane> face_planes(const TriMesh& m) {
  std::vector<Plane> planes;
  planes.reserve(m.triangles.size());
  for (const auto& t : m.triangles) {
    const Vec3& a = m.vertices[t[0]];
    Vec3 n = (m.vertices[t[1]] - a).cross(m.vertices[t[2]] - a);
    const double len = n.norm();
    if (len < 1e-300) continue;
    n /= len;
    planes.push_back({n, n.dot(a)});
  }
  return planes;
}

}  // namespace

std::vector<std::array<int, 3>> triangulate(const Polygon2D& poly) {
  const int n = static_cast<int>(poly.size());
  if (n < 3) throw std::invalid_argument("triangulate: polygon needs >= 3 vertices");
  if (signed_area(poly) <= 0) throw std::invalid_argument("triangulate: polygon is not CCW");
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::vector<std::array<int, 3>> tris;
  tris.reserve(n - 2);
  int guard = 0;
  while (idx.size() > 3) {
    const int m = static_cast<int>(idx.size());
    bool clipped = false;
    for (int i = 0; i < m; ++i) {
      const int ia = idx[(i + m - 1) % m], ib = idx[i], ic = idx[(i + 1) % m];
      const Vec2 &a = poly[ia], &b = poly[ib], &c = poly[ic];
      if (cross2(b - a, c - b) <= 1e-12) continue;  // reflex or degenerate
      bool blocked = false;
      for (int j = 0; j < m && !blocked; ++j) {
        const int ij = idx[j];
        if (ij == ia || ij == ib || ij == ic) continue;
        const Vec2& p = poly[ij];
        if ((p - a).norm() < 1e-12 || (p - b).norm() < 1e-12 || (p - c).norm() < 1e-12) continue;
        blocked = point_in_triangle(p, a, b, c);
      }
      if (blocked) continue;
      tris.push_back({ia, ib, ic});
      idx.erase(idx.begin() + i);
      clipped = true;
      break;
    }
    if (!clipped) {
      // Remaining collinear vertices can be dropped without losing area.
      bool dropped = false;
      for (int i = 0; i < m; ++i) {
        const Vec2& a = poly[idx[(i + m - 1) % m]];
        const Vec2& b = poly[idx[i]];
        const Vec2& c = poly[idx[(i + 1) % m]];
        if (std::abs(cross2(b - a, c - b)) <= 1e-12) {
          idx.erase(idx.begin() + i);
          dropped = true;
          break;
        }
      }
      if (!dropped || ++guard > n) {
        throw std::invalid_argument("triangulate: no ear found (self-intersecting polygon?)");
      }
    }
  }
  const Vec2 &a = poly[idx[0]], &b = poly[idx[1]], &c = poly[idx[2]];
  if (cross2(b - a, c - b) > 1e-12) tris.push_back({idx[0], idx[1], idx[2]});
  return tris;
}

TriMesh extrude_polygon(const Polygon2D& poly, double height, double z0) {
  if (!(height > 0)) throw std::invalid_argument("extrude_polygon: height must be positive");
  if (!is_simple(poly)) throw std::invalid_argument("extrude_polygon: polygon is not simple");
  const auto caps = triangulate(poly);
  const int n = static_cast<int>(poly.size());
  TriMesh m;
  m.vertices.reserve(2 * n);
  for (const auto& v : poly.vertices) m.vertices.emplace_back(v.x(), v.y(), z0);
  for (const auto& v : poly.vertices) m.vertices.emplace_back(v.x(), v.y(), z0 + height);
  for (const auto& t : caps) {
    m.triangles.push_back({t[0], t[2], t[1]});              // bottom faces -z
    m.triangles.push_back({t[0] + n, t[1] + n, t[2] + n});  // top faces +z
  }
  for (int i = 0; i < n; ++i) {
    const int j = (i + 1) % n;
    m.triangles.push_back({i, j, j + n});
    m.triangles.push_back({i, j + n, i + n});
  }
  return m;
}

bool watertight_check(const TriMesh& m) {
  if (m.triangles.empty()) return false;
  const int nv = static_cast<int>(m.vertices.size());
  std::map<std::pair<int, int>, int> directed;
  for (const auto& t : m.triangles) {
    for (int k = 0; k < 3; ++k) {
      const int a = t[k], b = t[(k + 1) % 3];
      if (a < 0 || a >= nv || b < 0 || b >= nv || a == b) return false;
      if (++directed[{a, b}] > 1) return false;
    }
  }
  for (const auto& [edge, count] : directed) {
    auto it = directed.find({edge.second, edge.first});
    if (it == directed.end() || it->second != 1) return false;
  }
  // Single connected component over triangles sharing an edge.
  std::vector<int> parent(m.triangles.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::map<std::pair<int, int>, int> owner;
  for (int ti = 0; ti < static_cast<int>(m.triangles.size()); ++ti) {
    const auto& t = m.triangles[ti];
    for (int k = 0; k < 3; ++k) {
      const int a = std::min(t[k], t[(k + 1) % 3]), b = std::max(t[k], t[(k + 1) % 3]);
      auto [it, inserted] = owner.emplace(std::make_pair(a, b), ti);
      if (!inserted) parent[find(ti)] = find(it->second);
    }
  }
  const int root = find(0);
  for (int ti = 1; ti < static_cast<int>(m.triangles.size()); ++ti) {
    if (find(ti) != root) return false;
  }
  return true;
}

double signed_volume(const TriMesh& m) {
  double v = 0.0;
  for (const auto& t : m.triangles) {
    v += m.vertices[t[0]].dot(m.vertices[t[1]].cross(m.vertices[t[2]]));
  }
  return v / 6.0;
}

double triangle_area(const TriMesh& m, int tri) {
  const auto& t = m.triangles[tri];
  return 0.5 * (m.vertices[t[1]] - m.vertices[t[0]]).cross(m.vertices[t[2]] - m.vertices[t[0]]).norm();
}

// Polyhedral moments via the divergence theorem (Eberly's formulation).
MassProps mass_props(const TriMesh& m, double density) {
  if (!watertight_check(m)) throw std::invalid_argument("mass_props: mesh is not watertight");
  if (!(density > 0)) throw std::invalid_argument("mass_props: density must be positive");
  auto sub = [](double w0, double w1, double w2, double& f1, double& f2, double& f3, double& g0,
                double& g1, double& g2) {
    const double t0 = w0 + w1;
    f1 = t0 + w2;
    const double t1 = w0 * w0;
    const double t2 = t1 + w1 * t0;
    f2 = t2 + w2 * f1;
    f3 = w0 * t1 + w1 * t2 + w2 * f2;
    g0 = f2 + w0 * (f1 + w0);
    g1 = f2 + w1 * (f1 + w1);
    g2 = f2 + w2 * (f1 + w2);
  };
  std::array<double, 10> in{};
  for (const auto& t : m.triangles) {
    const Vec3 &p0 = m.vertices[t[0]], &p1 = m.vertices[t[1]], &p2 = m.vertices[t[2]];
    const Vec3 d = (p1 - p0).cross(p2 - p0);
    double f1x, f2x, f3x, g0x, g1x, g2x, f1y, f2y, f3y, g0y, g1y, g2y, f1z, f2z, f3z, g0z, g1z, g2z;
    sub(p0.x(), p1.x(), p2.x(), f1x, f2x, f3x, g0x, g1x, g2x);
    sub(p0.y(), p1.y(), p2.y(), f1y, f2y, f3y, g0y, g1y, g2y);
    sub(p0.z(), p1.z(), p2.z(), f1z, f2z, f3z, g0z, g1z, g2z);
    in[0] += d.x() * f1x;
    in[1] += d.x() * f2x;
    in[2] += d.y() * f2y;
    in[3] += d.z() * f2z;
    in[4] += d.x() * f3x;
    in[5] += d.y() * f3y;
    in[6] += d.z() * f3z;
    in[7] += d.x() * (p0.y() * g0x + p1.y() * g1x + p2.y() * g2x);
    in[8] += d.y() * (p0.z() * g0y + p1.z() * g1y + p2.z() * g2y);
    in[9] += d.z() * (p0.x() * g0z + p1.x() * g1z + p2.x() * g2z);
  }
  constexpr std::array<double, 10> kMult = {1.0 / 6,   1.0 / 24,  1.0 / 24,  1.0 / 24,
                                            1.0 / 60,  1.0 / 60,  1.0 / 60,  1.0 / 120,
                                            1.0 / 120, 1.0 / 120};
  for (int i = 0; i < 10; ++i) in[i] *= kMult[i] * density;

  MassProps mp;
  mp.mass = in[0];
  if (!(mp.mass > 0)) throw std::invalid_argument("mass_props: non-positive volume");
  mp.com = Vec3(in[1], in[2], in[3]) / mp.mass;
  const Vec3& c = mp.com;
  Mat3& I = mp.inertia;
  I(0, 0) = in[5] + in[6] - mp.mass * (c.y() * c.y() + c.z() * c.z());
  I(1, 1) = in[4] + in[6] - mp.mass * (c.z() * c.z() + c.x() * c.x());
  I(2, 2) = in[4] + in[5] - mp.mass * (c.x() * c.x() + c.y() * c.y());
  I(0, 1) = I(1, 0) = -(in[7] - mp.mass * c.x() * c.y());
  I(1, 2) = I(2, 1) = -(in[8] - mp.mass * c.y() * c.z());
  I(0, 2) = I(2, 0) = -(in[9] - mp.mass * c.z() * c.x());
  return mp;
}

ConvexPiece convex_hull(std::span<const Vec3> input, double eps) {
  std::vector<Vec3> pts;
  for (const auto& p : input) {
    const bool dup = std::any_of(pts.begin(), pts.end(),
                                 [&](const Vec3& q) { return (p - q).norm() <= eps; });
    if (!dup) pts.push_back(p);
  }
  const int n = static_cast<int>(pts.size());
  if (n < 4) throw std::invalid_argument("convex_hull: fewer than 4 distinct points");
  double scale = 0.0;
  for (const auto& p : pts) scale = std::max(scale, (p - pts[0]).norm());
  const double plane_tol = std::max(eps, 1e-12 * scale);

  std::vector<Plane> planes;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      for (int k = j + 1; k < n; ++k) {
        Vec3 nrm = (pts[j] - pts[i]).cross(pts[k] - pts[i]);
        const double len = nrm.norm();
        if (len <= 1e-12 * scale * scale) continue;
        nrm /= len;
        double d = nrm.dot(pts[i]);
        bool pos = false, neg = false;
        for (int q = 0; q < n && !(pos && neg); ++q) {
          const double s = nrm.dot(pts[q]) - d;
          if (s > plane_tol) pos = true;
          if (s < -plane_tol) neg = true;
        }
        if (pos && neg) continue;
        if (pos) {
          nrm = -nrm;
          d = -d;
        }
        const bool known = std::any_of(planes.begin(), planes.end(), [&](const Plane& pl) {
          return (pl.n - nrm).norm() < 1e-9 && std::abs(pl.d - d) <= plane_tol;
        });
        if (!known) planes.push_back({nrm, d});
      }
    }
  }
  if (planes.size() < 4) throw std::invalid_argument("convex_hull: degenerate (flat) point set");

  std::vector<std::array<int, 3>> tris;
  for (const auto& pl : planes) {
    std::vector<int> on;
    for (int q = 0; q < n; ++q) {
      if (std::abs(pl.n.dot(pts[q]) - pl.d) <= plane_tol) on.push_back(q);
    }
    Vec3 u = pl.n.unitOrthogonal();
    Vec3 v = pl.n.cross(u);
    std::vector<Vec2> proj(n);
    for (int q : on) proj[q] = Vec2(u.dot(pts[q]), v.dot(pts[q]));
    const auto ring = hull_2d(proj, on);
    for (std::size_t t = 1; t + 1 < ring.size(); ++t) {
      tris.push_back({ring[0], ring[t], ring[t + 1]});
    }
  }
  // Compact to used vertices.
  std::vector<int> remap(n, -1);
  ConvexPiece piece;
  for (auto& t : tris) {
    for (int& id : t) {
      if (remap[id] < 0) {
        remap[id] = static_cast<int>(piece.mesh.vertices.size());
        piece.mesh.vertices.push_back(pts[id]);
      }
      id = remap[id];
    }
  }
  piece.mesh.triangles = std::move(tris);
  return piece;
}

bool is_convex(const TriMesh& m, double tol) {
  if (m.triangles.empty() || signed_volume(m) <= 0) return false;
  return hull_deviation(m) <= tol;
}

double hull_deviation(const TriMesh& m) {
  double worst = 0.0;
  for (const auto& pl : face_planes(m)) {
    for (const auto& p : m.vertices) worst = std::max(worst, pl.n.dot(p) - pl.d);
  }
  return worst;
}

TriMesh transformed(const TriMesh& m, const Pose& pose) {
  TriMesh out = m;
  for (auto& v : out.vertices) v = pose * v;
  if (pose.linear().determinant() < 0) {
    for (auto& t : out.triangles) std::swap(t[1], t[2]);
  }
  return out;
}

TriMesh scaled(const TriMesh& m, const Vec3& scale) {
  TriMesh out = m;
  for (auto& v : out.vertices) v = v.cwiseProduct(scale);
  if (scale.prod() < 0) {
    for (auto& t : out.triangles) std::swap(t[1], t[2]);
  }
  return out;
}

void append(TriMesh& dst, const TriMesh& src) {
  const int offset = static_cast<int>(dst.vertices.size());
  dst.vertices.insert(dst.vertices.end(), src.vertices.begin(), src.vertices.end());
  for (const auto& t : src.triangles) {
    dst.triangles.push_back({t[0] + offset, t[1] + offset, t[2] + offset});
  }
}

Aabb bounding_box(const TriMesh& m) {
  Aabb box;
  for (const auto& v : m.vertices) {
    box.lo = box.lo.cwiseMin(v);
    box.hi = box.hi.cwiseMax(v);
  }
  return box;
}

}  // namespace handco
