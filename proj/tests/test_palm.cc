#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "handco/errors.h"
#include "handco/hand_model.h"
#include "handco/palm.h"

using namespace handco;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

Vec2 heading(const BaseFrame& f) { return (f.rotation * Vec3::UnitX()).head<2>(); }

std::vector<BaseAssignment> nominal(const HandOptions& opts = {}) {
  std::vector<BaseAssignment> out;
  for (const auto& d : digit_names(3)) out.push_back({d, opts.arcs.at(d), {}});
  return out;
}

}  // namespace

TEST(Outline, SquareOnCircle) {
  const Polygon2D p = build_outline(80, 4, 1.0);
  ASSERT_EQ(p.size(), 4u);
  const Vec2 expect[] = {{40, 0}, {0, 40}, {-40, 0}, {0, -40}};
  for (int k = 0; k < 4; ++k) EXPECT_NEAR((p[k] - expect[k]).norm(), 0.0, 1e-12) << k;
  EXPECT_NEAR(centroid(p).norm(), 0.0, 1e-12);
  EXPECT_TRUE(is_ccw(p));
}

TEST(Outline, AspectSquashesY) {
  const Polygon2D p = build_outline(80, 4, 2.0);
  EXPECT_NEAR(p[1].y(), 20.0, 1e-12);
  EXPECT_NEAR(p[3].y(), -20.0, 1e-12);
  EXPECT_NEAR(p[0].x(), 40.0, 1e-12);
}

TEST(Outline, HexagonVertices) {
  const Polygon2D p = build_outline(60, 6, 1.0);
  ASSERT_EQ(p.size(), 6u);
  for (int k = 0; k < 6; ++k) {
    const double a = k * 60.0 * kDeg;
    EXPECT_NEAR(p[k].x(), 30 * std::cos(a), 1e-12);
    EXPECT_NEAR(p[k].y(), 30 * std::sin(a), 1e-12);
  }
}

TEST(Outline, RejectsBadArguments) {
  EXPECT_THROW(build_outline(80, 2, 1), std::invalid_argument);
  EXPECT_THROW(build_outline(0, 6, 1), std::invalid_argument);
  EXPECT_THROW(build_outline(80, 6, -1), std::invalid_argument);
}

TEST(PlaceBases, ZeroParamsSitOnOutlineFacingOut) {
  const Polygon2D outline = build_outline(120, 6, 1);
  const auto frames = place_bases(outline, nominal(), 18.0);
  ASSERT_EQ(frames.size(), 4u);
  for (const auto& f : frames) {
    EXPECT_NEAR(distance_to_boundary(outline, f.origin.head<2>()), 0.0, 1e-9) << f.digit;
    EXPECT_NEAR(f.origin.z(), 18.0, 1e-12);
    EXPECT_NEAR(f.rotation.norm(), 1.0, 1e-9);
    // Outward: a small step along the heading leaves the polygon.
    EXPECT_FALSE(contains(outline, f.origin.head<2>() + 1.0 * heading(f))) << f.digit;
    EXPECT_TRUE(f.anchor.isApprox(f.origin.head<2>(), 1e-12) || (f.anchor - f.origin.head<2>()).norm() < 1e-12);
  }
}

TEST(PlaceBases, ThumbSideOffsetMovesAlongNegativeTangent) {
  const Polygon2D outline = build_outline(120, 6, 1);
  const double arc = HandOptions{}.arcs.at("thumb");
  BaseAssignment a{"thumb", arc, {}};
  const auto f0 = place_bases(outline, std::vector{a}, 18.0)[0];
  a.pose.side_offset = -40.0;
  const auto f1 = place_bases(outline, std::vector{a}, 18.0)[0];
  const Vec2 tangent = sample_outline(outline, arc).tangent;
  const Vec2 d = f1.origin.head<2>() - f0.origin.head<2>();
  EXPECT_NEAR(d.norm(), 40.0, 1e-9);
  EXPECT_NEAR(d.dot(tangent), -40.0, 1e-9);
}

TEST(PlaceBases, AngleRotatesHeadingOnly) {
  const Polygon2D outline = build_outline(120, 6, 1);
  BaseAssignment a{"index", 0.3125, {}};
  const auto f0 = place_bases(outline, std::vector{a}, 18.0)[0];
  a.pose.angle_deg = 30.0;
  const auto f1 = place_bases(outline, std::vector{a}, 18.0)[0];
  EXPECT_NEAR((f1.origin - f0.origin).norm(), 0.0, 1e-12);
  const Vec2 h0 = heading(f0), h1 = heading(f1);
  const double turned = std::atan2(h0.x() * h1.y() - h0.y() * h1.x(), h0.dot(h1));
  EXPECT_NEAR(turned, 30.0 * kDeg, 1e-12);
  EXPECT_NEAR((f1.rotation * Vec3::UnitZ() - Vec3::UnitZ()).norm(), 0.0, 1e-12);
}

TEST(PlaceBases, ZeroParamsIdempotent) {
  const Polygon2D outline = build_outline(120, 6, 1);
  const auto a = place_bases(outline, nominal(), 18.0);
  const auto b = place_bases(outline, nominal(), 18.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].origin, b[i].origin);
    EXPECT_TRUE(a[i].rotation.isApprox(b[i].rotation, 0.0));
  }
}

TEST(Finalize, ZeroOffsetsKeepOutline) {
  const Polygon2D outline = build_outline(120, 6, 1);
  const auto frames = place_bases(outline, nominal(), 18.0);
  const Polygon2D out = finalize_outline(outline, frames);
  EXPECT_NEAR(signed_area(out), signed_area(outline), 1e-6);
  EXPECT_EQ(prune_collinear(out).size(), 6u);
}

TEST(Finalize, NormalOffsetGrowsArea) {
  const Polygon2D outline = build_outline(120, 6, 1);
  auto as = nominal();
  as.back().pose.normal_offset = 30.0;
  const auto frames = place_bases(outline, as, 18.0);
  const Polygon2D out = finalize_outline(outline, frames);
  EXPECT_GT(signed_area(out), signed_area(outline) + 1.0);
  EXPECT_TRUE(contains(out, frames.back().origin.head<2>(), 1e-6));
}

TEST(Finalize, RandomOffsetsStaySimpleAndContainBases) {
  const Polygon2D outline = build_outline(120, 6, 1);
  std::mt19937_64 rng(2024);
  auto u = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  int infeasible = 0;
  for (int i = 0; i < 500; ++i) {
    auto as = nominal();
    for (auto& a : as) {
      if (a.digit == "thumb") {
        a.pose = {u(-30, 30), u(-30, 30), u(-40, 10), 22.0};
      } else if (a.digit == "middle") {
        a.pose.normal_offset = u(0, 10);
      } else if (a.digit == "index") {
        a.pose = {u(0, 30), u(0, 5), u(0, 30), 22.0};
      } else {
        a.pose = {u(-30, 0), u(0, 5), u(-30, 0), 22.0};
      }
    }
    const auto frames = place_bases(outline, as, 18.0);
    Polygon2D out;
    try {
      out = finalize_outline(outline, frames);
    } catch (const InfeasibleDesign&) {
      ++infeasible;
      continue;
    }
    ASSERT_TRUE(is_simple(out)) << i;
    ASSERT_TRUE(is_ccw(out)) << i;
    ASSERT_GE(signed_area(out), signed_area(outline) - 1e-6) << i;
    for (const auto& f : frames) ASSERT_TRUE(contains(out, f.origin.head<2>(), 1e-6)) << i << " " << f.digit;
    for (std::size_t k = 0; k < out.size(); ++k) ASSERT_GE((out.next(k) - out[k]).norm(), 1.0 - 1e-9);
  }
  EXPECT_EQ(infeasible, 0);
}

TEST(PalmBody, ExtrusionIsWatertight) {
  const PalmExtrusion e = extrude_palm(build_outline(120, 6, 1), 18.0);
  EXPECT_TRUE(watertight_check(e.mesh));
  EXPECT_NEAR(e.top_z, 18.0, 1e-12);
  EXPECT_NEAR(signed_volume(e.mesh), 18.0 * signed_area(e.top_face), 1e-6);
}

TEST(PalmBody, SampledDesignsGiveWatertightPalms) {
  const DesignSpace space = build_power_grasp_space();
  HandOptions opts;
  opts.pad_resolution = 8;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const HandModel h = assemble_hand(sample_uniform(space, seed), opts);
    if (!h.feasible) continue;
    EXPECT_TRUE(watertight_check(h.palm.mesh)) << seed;
    EXPECT_NEAR(bounding_box(h.palm.mesh).lo.z(), 0.0, 1e-9) << seed;
  }
}
