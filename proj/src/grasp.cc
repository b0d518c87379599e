#include "handco/grasp.h"

#include <numbers>
#include <random>

#include "handco/errors.h"

namespace handco {
namespace {

constexpr double kDeg = std::numbers::pi / 180.0;
constexpr std::array<const char*, 3> kTrans = {"tx", "ty", "tz"};
constexpr std::array<const char*, 3> kRot = {"rx", "ry", "rz"};

ParamSpec range_param(const std::string& name, double lo, double hi, const std::string& unit,
                      const std::string& group) {
  ParamSpec p;
  p.name = name;
  p.kind = ParamKind::kContinuous;
  p.lo = lo;
  p.hi = hi;
  p.unit = unit;
  p.group = group;
  return p;
}

double value_or_zero(const DesignPoint& p, const std::string& name) {
  return p.has(name) ? p.number(name) : 0.0;
}

}  // namespace

Pose perturbation(const Vec3& translation_mm, const Vec3& rotation_deg) {
  Pose t = Pose::Identity();
  t.translation() = translation_mm;
  t.linear() = (Eigen::AngleAxisd(rotation_deg.z() * kDeg, Vec3::UnitZ()) *
                Eigen::AngleAxisd(rotation_deg.y() * kDeg, Vec3::UnitY()) *
                Eigen::AngleAxisd(rotation_deg.x() * kDeg, Vec3::UnitX()))
                   .toRotationMatrix();
  return t;
}

DesignSpace grasp_space(const HandModel& hand, const PerturbBounds& bounds) {
  std::vector<ParamSpec> params;
  for (int k = 0; k < 3; ++k) {
    const double b = bounds.translation_mm(k);
    if (b > 0) params.push_back(range_param(kTrans[k], -b, b, "mm", "wrist"));
  }
  for (int k = 0; k < 3; ++k) {
    const double b = bounds.rotation_deg(k);
    if (b > 0) params.push_back(range_param(kRot[k], -b, b, "deg", "wrist"));
  }
  if (bounds.spread_hi_deg > bounds.spread_lo_deg) {
    for (const auto& c : hand.chains) {
      if (base_side_joint(c) >= 0) {
        params.push_back(range_param("spread_" + c.digit, bounds.spread_lo_deg, bounds.spread_hi_deg, "deg",
                                     "spread"));
      }
    }
  }
  if (params.empty()) throw ConfigError("grasp space is empty: all perturbation bounds are zero");
  return DesignSpace("grasp", std::move(params));
}

GraspConfig grasp_from_point(const HandModel& hand, const ToolModel& tool, const DesignPoint& p) {
  Vec3 t, r;
  for (int k = 0; k < 3; ++k) {
    t(k) = value_or_zero(p, kTrans[k]);
    r(k) = value_or_zero(p, kRot[k]);
  }
  GraspConfig g;
  g.t_grasp = tool.wrist * perturbation(t, r);
  for (const auto& c : hand.chains) g.spread.push_back(value_or_zero(p, "spread_" + c.digit));
  g.q0 = preshape(hand, g.spread);
  return g;
}

GraspConfig sample_grasp(const HandModel& hand, const ToolModel& tool, const PerturbBounds& bounds,
                         std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto uniform = [&](double lo, double hi) {
    if (!(hi > lo)) return 0.5 * (lo + hi);
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };
  Vec3 t, r;
  for (int k = 0; k < 3; ++k) t(k) = uniform(-bounds.translation_mm(k), bounds.translation_mm(k));
  for (int k = 0; k < 3; ++k) r(k) = uniform(-bounds.rotation_deg(k), bounds.rotation_deg(k));
  GraspConfig g;
  g.t_grasp = tool.wrist * perturbation(t, r);
  for (const auto& c : hand.chains) {
    g.spread.push_back(base_side_joint(c) >= 0 ? uniform(bounds.spread_lo_deg, bounds.spread_hi_deg) : 0.0);
  }
  g.q0 = preshape(hand, g.spread);
  return g;
}

GraspResult evaluate_grasp(const HandModel& hand, const ToolModel& tool, const GraspConfig& g,
                           const GraspSettings& settings) {
  GraspResult r;
  r.config = g;
  r.contacts = close_fingers(hand, tool, g, settings.closing);
  WrenchTestSpec spec = settings.wrench;
  spec.object_mass = tool.mass;
  if (r.contacts.feasible) r.score = grasp_score(r.contacts.contacts, spec);
  return r;
}

GraspSearch optimize_grasp(const HandModel& hand, const ToolModel& tool, int budget, std::uint64_t seed,
                           const GraspSettings& settings) {
  if (budget < 1) throw ConfigError("grasp budget must be >= 1");
  const DesignSpace space = grasp_space(hand, settings.bounds);
  OptimizeOptions opts;
  opts.budget = budget;
  opts.seed = seed;
  opts.tpe = settings.tpe;
  const auto objective = [&](const DesignPoint& p, std::uint64_t) {
    const GraspResult r = evaluate_grasp(hand, tool, grasp_from_point(hand, tool, p), settings);
    ObjectiveResult o;
    o.score = r.score.s_t;
    o.status = r.contacts.feasible ? "ok" : "infeasible";
    o.info = {{"contacts", r.contacts.contacts.size()}};
    return o;
  };
  GraspSearch out;
  OptimizeResult res = optimize(objective, space, opts);
  out.best = evaluate_grasp(hand, tool, grasp_from_point(hand, tool, res.history[res.best].point), settings);
  out.history = std::move(res.history);
  return out;
}

}  // namespace handco
