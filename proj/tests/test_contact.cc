#include <gtest/gtest.h>

#include <numbers>
#include <set>

#include "handco/errors.h"
#include "handco/grasp.h"

using namespace handco;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

ToolModel ball(double radius) {
  ToolModel t;
  t.name = "ball";
  t.mass = 0.1;
  Primitive p;
  p.shape = Shape::kCapsule;
  p.dims = Vec3(0, radius, 0);
  t.primitives.push_back(p);
  return t;
}

GraspConfig open_grasp(const HandModel& hand, const Vec3& ball_in_palm) {
  GraspConfig g;
  g.t_grasp = Pose::Identity();
  g.t_grasp.translation() = -ball_in_palm;
  g.spread.assign(hand.chains.size(), 0.0);
  g.q0 = preshape(hand, g.spread);
  return g;
}

const HandModel& default_hand() {
  static const HandModel h = assemble_hand(default_design());
  return h;
}

}  // namespace

TEST(Tools, BuiltinSet) {
  const auto tools = builtin_tools();
  ASSERT_EQ(tools.size(), 3u);
  EXPECT_EQ(tools[0].name, "hammer");
  EXPECT_EQ(tools[1].name, "spoon");
  EXPECT_EQ(tools[2].name, "knife");
  EXPECT_GT(builtin_tool("hammer").mass, builtin_tool("spoon").mass);
  for (const auto& t : tools) {
    EXPECT_FALSE(t.primitives.empty());
    EXPECT_GT(t.mass, 0.0);
    const Mat3 r = t.wrist.linear();
    EXPECT_NEAR((r.transpose() * r - Mat3::Identity()).norm(), 0.0, 1e-12) << t.name;
    EXPECT_NEAR(r.determinant(), 1.0, 1e-12);
  }
  EXPECT_THROW(builtin_tool("saw"), ConfigError);
}

TEST(Tools, HammerDimensions) {
  const ToolModel h = builtin_tool("hammer");
  // Handle surface on its mid-line, head extends 45 mm either side.
  EXPECT_NEAR(h.sdf(Vec3(0, 12.5, 0)), 0.0, 1e-9);
  EXPECT_LT(h.sdf(Vec3(125, 0, 40)), 0.0);
  EXPECT_GT(h.sdf(Vec3(0, 0, 40)), 0.0);
}

TEST(Tools, SdfSignsAndNormals) {
  const ToolModel b = ball(10);
  EXPECT_NEAR(b.sdf(Vec3(20, 0, 0)), 10.0, 1e-12);
  EXPECT_NEAR(b.sdf(Vec3::Zero()), -10.0, 1e-12);
  EXPECT_TRUE(b.normal(Vec3(0, 0, 15)).isApprox(Vec3::UnitZ(), 1e-6));
  Primitive box;
  box.shape = Shape::kBox;
  box.dims = Vec3(2, 4, 6);
  EXPECT_NEAR(box.sdf(Vec3(3, 0, 0)), 2.0, 1e-12);
  EXPECT_NEAR(box.sdf(Vec3(0, 0, 0)), -1.0, 1e-12);
  EXPECT_NEAR(box.sdf(Vec3(2, 3, 0)), std::sqrt(2.0), 1e-12);
  Primitive cyl;
  cyl.shape = Shape::kCylinder;
  cyl.dims = Vec3(10, 3, 0);
  EXPECT_NEAR(cyl.sdf(Vec3(0, 5, 0)), 2.0, 1e-12);
  EXPECT_NEAR(cyl.sdf(Vec3(7, 0, 0)), 2.0, 1e-12);
}

TEST(Tools, JsonRoundTrip) {
  for (const auto& t : builtin_tools()) {
    const ToolModel back = tool_from_json(nlohmann::json::parse(to_json(t).dump()));
    EXPECT_EQ(back.name, t.name);
    EXPECT_EQ(back.mass, t.mass);
    EXPECT_TRUE(back.wrist.isApprox(t.wrist, 1e-15));
    EXPECT_EQ(back.primitives.size(), t.primitives.size());
    EXPECT_EQ(to_json(back), to_json(t));
  }
}

TEST(Closing, FarToolGivesNoContactsAndJointsAtLimits) {
  const HandModel& hand = default_hand();
  const ContactSet cs = close_fingers(hand, ball(20), open_grasp(hand, Vec3(0, 0, 1000)));
  EXPECT_TRUE(cs.feasible);
  EXPECT_TRUE(cs.contacts.empty());
  ASSERT_EQ(cs.q.size(), hand.chains.size());
  for (std::size_t c = 0; c < hand.chains.size(); ++c) {
    for (int j : closing_joints(hand.chains[c])) {
      EXPECT_NEAR(cs.q[c][j], hand.chains[c].joints[j].hi_deg, 1e-9) << hand.chains[c].digit << " " << j;
    }
  }
}

TEST(Closing, BallInsideFingersTouchesEveryFinger) {
  const HandModel& hand = default_hand();
  const ToolModel b = ball(25);
  const Vec3 center(0, 100, 55);
  const ContactSet cs = close_fingers(hand, b, open_grasp(hand, center));
  ASSERT_TRUE(cs.feasible);
  EXPECT_GE(cs.contacts.size(), 3u);
  std::set<std::string> digits;
  for (const auto& c : cs.contacts) {
    digits.insert(c.link.substr(0, c.link.find('_')));
    // Signed-distance oracle: the ball surface and its inward normal.
    EXPECT_NEAR(c.point.norm(), 25.0, 1e-3) << c.link;
    EXPECT_TRUE(c.normal.isApprox(-c.point.normalized(), 1e-3)) << c.link;
    EXPECT_LE(c.distance, 0.5 + 1e-9) << c.link;
    EXPECT_NEAR(c.normal.norm(), 1.0, 1e-9);
    EXPECT_EQ(c.mu, 0.8);
    EXPECT_EQ(c.cap, 8.0);
  }
  EXPECT_GE(digits.size(), 3u);
}

TEST(Closing, ContactDistancesWithinTolerance) {
  const HandModel& hand = default_hand();
  const ClosingOptions opts;
  for (const auto& tool : builtin_tools()) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const ContactSet cs = close_fingers(hand, tool, sample_grasp(hand, tool, PerturbBounds{}, seed), opts);
      for (const auto& c : cs.contacts) {
        EXPECT_LE(c.distance, opts.tolerance + 1e-9) << tool.name << " " << c.link;
        EXPECT_LE(std::abs(tool.sdf(c.point)), opts.tolerance + 1e-6) << tool.name << " " << c.link;
      }
    }
  }
}

TEST(Closing, PenetratingStartIsInfeasible) {
  const HandModel& hand = default_hand();
  const ContactSet cs = close_fingers(hand, ball(30), open_grasp(hand, Vec3(0, 0, 20)));
  EXPECT_FALSE(cs.feasible);
  EXPECT_TRUE(cs.contacts.empty());
  GraspSettings s;
  const GraspResult r = evaluate_grasp(hand, ball(30), open_grasp(hand, Vec3(0, 0, 20)), s);
  EXPECT_EQ(r.score.s_t, 0.0);
}

TEST(Preshape, SpreadOnBaseSideAndThumbRoll) {
  const HandModel& hand = default_hand();
  std::vector<double> spread(hand.chains.size(), 7.0);
  const auto q = preshape(hand, spread);
  for (std::size_t c = 0; c < hand.chains.size(); ++c) {
    const FingerChain& ch = hand.chains[c];
    const int side = base_side_joint(ch);
    ASSERT_GE(side, 0) << ch.digit;
    EXPECT_EQ(q[c][side], 7.0);
    for (std::size_t j = 0; j < ch.dof(); ++j) {
      if (static_cast<int>(j) == side) continue;
      if (ch.is_thumb && ch.joints[j].type == JointType::Axial) {
        EXPECT_EQ(q[c][j], 90.0);
      } else {
        EXPECT_EQ(q[c][j], 0.0);
      }
    }
  }
}

TEST(SampleGrasp, ZeroBoundsGiveReferencePose) {
  const HandModel& hand = default_hand();
  PerturbBounds zero;
  zero.translation_mm.setZero();
  zero.rotation_deg.setZero();
  zero.spread_lo_deg = zero.spread_hi_deg = 0.0;
  for (const auto& tool : builtin_tools()) {
    const GraspConfig g = sample_grasp(hand, tool, zero, 5);
    EXPECT_TRUE(g.t_grasp.isApprox(tool.wrist, 0.0)) << tool.name;
    for (double s : g.spread) EXPECT_EQ(s, 0.0);
  }
}

TEST(SampleGrasp, ComponentsWithinBounds) {
  const HandModel& hand = default_hand();
  const ToolModel tool = builtin_tool("hammer");
  const PerturbBounds b;
  for (std::uint64_t seed = 0; seed < 10000; ++seed) {
    const GraspConfig g = sample_grasp(hand, tool, b, seed);
    const Pose p = tool.wrist.inverse() * g.t_grasp;
    const Vec3 t = p.translation();
    const Vec3 zyx = p.linear().eulerAngles(2, 1, 0) / kDeg;
    for (int k = 0; k < 3; ++k) ASSERT_LE(std::abs(t(k)), b.translation_mm(k) + 1e-9);
    // Small angles: take the representative nearest zero.
    for (int k = 0; k < 3; ++k) {
      double a = zyx(k);
      while (a > 90) a -= 180;
      while (a < -90) a += 180;
      ASSERT_LE(std::abs(a), 15.0 + 1e-6);
    }
    for (double s : g.spread) {
      ASSERT_GE(s, b.spread_lo_deg);
      ASSERT_LE(s, b.spread_hi_deg);
    }
    const Mat3 r = g.t_grasp.linear();
    ASSERT_NEAR((r.transpose() * r - Mat3::Identity()).norm(), 0.0, 1e-9);
  }
}

TEST(SampleGrasp, Deterministic) {
  const HandModel& hand = default_hand();
  const ToolModel tool = builtin_tool("knife");
  const GraspConfig a = sample_grasp(hand, tool, PerturbBounds{}, 9), b = sample_grasp(hand, tool, PerturbBounds{}, 9);
  EXPECT_TRUE(a.t_grasp.isApprox(b.t_grasp, 0.0));
  EXPECT_EQ(a.spread, b.spread);
  EXPECT_EQ(a.q0, b.q0);
}

TEST(GraspSpace, DimensionsFollowHand) {
  const HandModel& hand = default_hand();
  const DesignSpace s = grasp_space(hand, PerturbBounds{});
  EXPECT_EQ(s.size(), 6u + hand.chains.size());
  PerturbBounds none;
  none.translation_mm.setZero();
  none.rotation_deg.setZero();
  none.spread_lo_deg = none.spread_hi_deg = 0;
  EXPECT_THROW(grasp_space(hand, none), ConfigError);
}

TEST(OptimizeGrasp, BudgetOneAndRunningMax) {
  const HandModel& hand = default_hand();
  const GraspSettings s;
  const ToolModel tool = builtin_tool("hammer");
  const GraspSearch one = optimize_grasp(hand, tool, 1, 3, s);
  ASSERT_EQ(one.history.size(), 1u);
  EXPECT_EQ(one.best.score.s_t, one.history[0].score);
  EXPECT_THROW(optimize_grasp(hand, tool, 0, 3, s), ConfigError);

  const GraspSearch run = optimize_grasp(hand, tool, 30, 4, s);
  const auto best = best_so_far(run.history);
  for (std::size_t i = 1; i < best.size(); ++i) EXPECT_GE(best[i], best[i - 1]);
  EXPECT_EQ(run.best.score.s_t, best.back());

  const GraspSearch again = optimize_grasp(hand, tool, 30, 4, s);
  for (std::size_t i = 0; i < run.history.size(); ++i) EXPECT_EQ(again.history[i].score, run.history[i].score);
}

TEST(OptimizeGrasp, BeatsPairedRandomSearch) {
  const HandModel& hand = default_hand();
  const GraspSettings s;
  const ToolModel tool = builtin_tool("hammer");
  int wins = 0;
  for (std::uint64_t rep = 0; rep < 20; ++rep) {
    const double tpe = optimize_grasp(hand, tool, 60, rep, s).best.score.s_t;
    double random = 0.0;
    for (int i = 0; i < 60; ++i) {
      const GraspConfig g = sample_grasp(hand, tool, s.bounds, trial_seed(rep, i));
      random = std::max(random, evaluate_grasp(hand, tool, g, s).score.s_t);
    }
    wins += tpe >= random;
  }
  EXPECT_GE(wins, 15);
}
