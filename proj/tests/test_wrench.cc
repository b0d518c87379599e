#include <gtest/gtest.h>

#include <random>

#include "handco/simplex.h"
#include "handco/wrench.h"
#include "oracles.h"

using namespace handco;

namespace {

Eigen::MatrixXd mat(int r, int c, std::initializer_list<double> v) {
  Eigen::MatrixXd m(r, c);
  auto it = v.begin();
  for (int i = 0; i < r; ++i) {
    for (int j = 0; j < c; ++j) m(i, j) = *it++;
  }
  return m;
}

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(v.size()));
  int i = 0;
  for (double d : v) x(i++) = d;
  return x;
}

const Eigen::MatrixXd kNone(0, 2);
const Eigen::VectorXd kNoB(0);

Contact contact(const Vec3& p, const Vec3& n, double mu, double cap, const Vec3& t) {
  Contact c;
  c.point = p;
  c.normal = n;
  c.mu = mu;
  c.cap = cap;
  c.tangent = t;
  return c;
}

std::vector<Contact> random_set(std::mt19937_64& rng, int n) {
  std::vector<Contact> out;
  for (int i = 0; i < n; ++i) out.push_back(oracle::random_contact(rng));
  return out;
}

}  // namespace

TEST(Simplex, TextbookMaximum) {
  // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), 36
  const LpResult r = solve_lp(vec({3, 5}), mat(3, 2, {1, 0, 0, 2, 3, 2}), vec({4, 12, 18}), kNone, kNoB);
  ASSERT_EQ(r.status, LpStatus::kOptimal);
  EXPECT_NEAR(r.objective, 36.0, 1e-9);
  EXPECT_NEAR(r.x(0), 2.0, 1e-9);
  EXPECT_NEAR(r.x(1), 6.0, 1e-9);
}

TEST(Simplex, EqualityConstraints) {
  // max x + y, x + 2y = 4, x <= 3 -> x = 3, y = 0.5
  const LpResult r = solve_lp(vec({1, 1}), mat(1, 2, {1, 0}), vec({3}), mat(1, 2, {1, 2}), vec({4}));
  ASSERT_EQ(r.status, LpStatus::kOptimal);
  EXPECT_NEAR(r.objective, 3.5, 1e-9);
}

TEST(Simplex, InfeasibleAndUnbounded) {
  EXPECT_EQ(solve_lp(vec({1, 0}), mat(1, 2, {1, 0}), vec({1}), mat(1, 2, {1, 0}), vec({2})).status,
            LpStatus::kInfeasible);
  EXPECT_EQ(solve_lp(vec({1, 1}), mat(1, 2, {1, -1}), vec({1}), kNone, kNoB).status, LpStatus::kUnbounded);
}

TEST(Simplex, NegativeRightHandSide) {
  // max -x, -x <= -2 (x >= 2) -> -2
  const LpResult r = solve_lp(vec({-1}), mat(1, 1, {-1}), vec({-2}), Eigen::MatrixXd(0, 1), kNoB);
  ASSERT_EQ(r.status, LpStatus::kOptimal);
  EXPECT_NEAR(r.objective, -2.0, 1e-9);
}

TEST(Simplex, DegenerateDoesNotCycle) {
  // Beale's cycling example (as a maximisation).
  const LpResult r = solve_lp(vec({0.75, -150, 0.02, -6}),
                              mat(3, 4, {0.25, -60, -0.04, 9, 0.5, -90, -0.02, 3, 0, 0, 1, 0}), vec({0, 0, 1}),
                              Eigen::MatrixXd(0, 4), kNoB);
  ASSERT_EQ(r.status, LpStatus::kOptimal);
  EXPECT_NEAR(r.objective, 0.05, 1e-9);
}

TEST(Directions, TwelveAxisAligned) {
  for (int i = 0; i < kTestDirections; ++i) {
    const Wrench w = test_direction(i);
    EXPECT_NEAR(w.norm(), 1.0, 0.0);
    EXPECT_EQ(w(i / 2), i % 2 ? -1.0 : 1.0);
  }
  const WrenchTestSpec spec;
  EXPECT_EQ(direction_limit(0, spec), 20.0);
  EXPECT_NEAR(direction_limit(7, spec), 0.6 * 1000.0 / 100.0, 1e-12);
}

TEST(Resist, NoContactsIsZero) {
  EXPECT_EQ(resist_magnitude({}, test_direction(0), WrenchTestSpec{}), 0.0);
  EXPECT_EQ(grasp_score({}, WrenchTestSpec{}).s_t, 0.0);
}

TEST(Resist, SingleFrictionlessContact) {
  const std::vector<Contact> cs = {contact(Vec3::Zero(), Vec3::UnitZ(), 0.0, 10.0, Vec3::UnitX())};
  Wrench down = Wrench::Zero();
  down(2) = -1.0;
  EXPECT_NEAR(resist_magnitude(cs, down, WrenchTestSpec{}), 10.0, 1e-9);
  Wrench up = -down;
  EXPECT_NEAR(resist_magnitude(cs, up, WrenchTestSpec{}), 0.0, 1e-9);
}

TEST(Resist, AntipodalPairMatchesOracle) {
  const std::vector<Contact> cs = {contact(Vec3(30, 0, 0), -Vec3::UnitX(), 0.5, 10, Vec3::UnitZ()),
                                   contact(Vec3(-30, 0, 0), Vec3::UnitX(), 0.5, 10, Vec3::UnitZ())};
  WrenchTestSpec spec;
  Wrench fz = Wrench::Zero();
  fz(2) = 1.0;
  const double a = resist_magnitude(cs, fz, spec);
  const auto o = oracle::resist(cs, fz, spec.cone_edges, spec.torque_scale);
  EXPECT_NEAR(a, 10.0, 1e-6);  // 2 * mu * cap with an edge on the tangent axis
  EXPECT_NEAR(a, o.alpha, 1e-3);
  EXPECT_LE(a, o.upper + 1e-9);
}

TEST(Resist, RandomInstancesMatchOracle) {
  std::mt19937_64 rng(31);
  WrenchTestSpec spec;
  for (int inst = 0; inst < 25; ++inst) {
    const auto cs = random_set(rng, 1 + inst % 4);
    spec.cone_edges = 3 + inst % 6;
    for (int i = 0; i < kTestDirections; ++i) {
      const double a = resist_magnitude(cs, test_direction(i), spec);
      const auto o = oracle::resist(cs, test_direction(i), spec.cone_edges, spec.torque_scale);
      const double tol = 1e-3 * direction_limit(i, spec);
      EXPECT_NEAR(a, o.alpha, tol) << "instance " << inst << " direction " << i;
      EXPECT_LE(a, o.upper + 1e-9) << "instance " << inst << " direction " << i;
    }
  }
}

TEST(Resist, AddingContactNeverDecreases) {
  std::mt19937_64 rng(41);
  const WrenchTestSpec spec;
  for (int inst = 0; inst < 30; ++inst) {
    auto cs = random_set(rng, 1 + inst % 3);
    std::vector<double> before;
    for (int i = 0; i < kTestDirections; ++i) before.push_back(resist_magnitude(cs, test_direction(i), spec));
    cs.push_back(oracle::random_contact(rng));
    for (int i = 0; i < kTestDirections; ++i) EXPECT_GE(resist_magnitude(cs, test_direction(i), spec), before[i] - 1e-9);
  }
}

TEST(Resist, DoublingCapsDoublesAlpha) {
  std::mt19937_64 rng(43);
  const WrenchTestSpec spec;
  for (int inst = 0; inst < 30; ++inst) {
    auto cs = random_set(rng, 2 + inst % 3);
    auto doubled = cs;
    for (auto& c : doubled) c.cap *= 2.0;
    for (int i = 0; i < kTestDirections; ++i) {
      const double a = resist_magnitude(cs, test_direction(i), spec);
      EXPECT_NEAR(resist_magnitude(doubled, test_direction(i), spec), 2.0 * a, 1e-9 * std::max(1.0, a));
    }
  }
}

TEST(Resist, RigidRotationInvariance) {
  std::mt19937_64 rng(47);
  std::normal_distribution<double> g(0, 1);
  const WrenchTestSpec spec;
  for (int inst = 0; inst < 30; ++inst) {
    const auto cs = random_set(rng, 2 + inst % 3);
    const Eigen::Quaterniond q = Eigen::Quaterniond(g(rng), g(rng), g(rng), g(rng)).normalized();
    const Mat3 r = q.toRotationMatrix();
    auto rotated = cs;
    for (auto& c : rotated) {
      c.point = r * c.point;
      c.normal = r * c.normal;
      c.tangent = r * *c.tangent;
    }
    Wrench w;
    for (int k = 0; k < 6; ++k) w(k) = g(rng);
    w.normalize();
    Wrench wr;
    wr.head<3>() = r * w.head<3>();
    wr.tail<3>() = r * w.tail<3>();
    EXPECT_NEAR(resist_magnitude(cs, w, spec), resist_magnitude(rotated, wr, spec), 1e-9) << inst;
  }
}

TEST(Resist, GravityOffsetReducesUpwardCapacity) {
  const std::vector<Contact> cs = {contact(Vec3::Zero(), Vec3::UnitZ(), 0.0, 10.0, Vec3::UnitX())};
  WrenchTestSpec spec;
  spec.gravity = true;
  spec.object_mass = 0.5;
  Wrench down = Wrench::Zero();
  down(2) = -1.0;
  EXPECT_NEAR(resist_magnitude(cs, down, spec), 10.0 - 0.5 * 9.81, 1e-9);
}

TEST(GraspScore, Arithmetic) {
  // Box squeezed by two frictional pads resists forces and torques fully
  // when caps are huge.
  std::vector<Contact> cs;
  for (int s : {-1, 1}) {
    for (const Vec3& off : {Vec3(0, 20, 20), Vec3(0, -20, 20), Vec3(0, 20, -20), Vec3(0, -20, -20)}) {
      cs.push_back(contact(Vec3(s * 30.0, 0, 0) + off, Vec3(-s, 0, 0), 0.8, 1e4, Vec3::UnitY()));
    }
  }
  const WrenchTestSpec spec;
  const StabilityScore full = grasp_score(cs, spec);
  EXPECT_DOUBLE_EQ(full.s_t, 1.0);
  for (double d : full.per_direction) EXPECT_EQ(d, 1.0);

  // Score equals the mean of per-direction values exactly.
  std::mt19937_64 rng(3);
  for (int inst = 0; inst < 20; ++inst) {
    const StabilityScore s = grasp_score(random_set(rng, 1 + inst % 4), spec);
    double sum = 0;
    for (double d : s.per_direction) sum += d;
    EXPECT_EQ(s.s_t, sum / kTestDirections);
  }
}

TEST(GraspScore, HalfAndFullMix) {
  StabilityScore s;
  for (int i = 0; i < 12; ++i) s.per_direction[i] = i < 6 ? 1.0 : 0.5;
  double sum = 0;
  for (double d : s.per_direction) sum += d;
  EXPECT_DOUBLE_EQ(sum / 12, 0.75);
}

TEST(GraspScore, WithinUnitInterval) {
  std::mt19937_64 rng(5);
  const WrenchTestSpec spec;
  for (int inst = 0; inst < 1000; ++inst) {
    const StabilityScore s = grasp_score(random_set(rng, 1 + inst % 5), spec);
    ASSERT_GE(s.s_t, 0.0);
    ASSERT_LE(s.s_t, 1.0);
    for (double d : s.per_direction) {
      ASSERT_GE(d, 0.0);
      ASSERT_LE(d, 1.0);
    }
  }
}

TEST(HandScore, Examples) {
  EXPECT_DOUBLE_EQ(hand_score({{"hammer", {1.0, 0.5, 0.2}}}, 2), 0.75);
  EXPECT_DOUBLE_EQ(hand_score({{"hammer", {0.9}}, {"spoon", {0.6}}, {"knife", {0.3}}}, 1), 0.6);
  EXPECT_DOUBLE_EQ(hand_score({{"hammer", {0, 0, 0}}, {"spoon", {0, 0, 0}}}, 3), 0.0);
  // Order of the scores does not matter.
  EXPECT_DOUBLE_EQ(hand_score({{"hammer", {0.2, 1.0, 0.5}}}, 2), 0.75);
}

TEST(HandScore, TooFewGraspsNamesTool) {
  try {
    hand_score({{"hammer", {1.0, 0.5}}, {"spoon", {0.3}}}, 2);
    FAIL() << "expected an error";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("spoon"), std::string::npos);
  }
}
