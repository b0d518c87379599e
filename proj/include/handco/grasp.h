#pragma once

#include <cstdint>
#include <vector>

#include "handco/contact.h"
#include "handco/tpe.h"
#include "handco/wrench.h"

namespace handco {

struct PerturbBounds {
  Vec3 translation_mm = Vec3::Constant(20.0);
  Vec3 rotation_deg = Vec3::Constant(15.0);
  double spread_lo_deg = -15.0;
  double spread_hi_deg = 15.0;
};

struct GraspSettings {
  ClosingOptions closing;
  WrenchTestSpec wrench;
  PerturbBounds bounds;
  TpeConfig tpe;
};

/// Wrist perturbation: translation then intrinsic Z-Y-X rotation, in the
/// wrist frame.
Pose perturbation(const Vec3& translation_mm, const Vec3& rotation_deg);

/// Grasp search space for a hand: tx, ty, tz, rx, ry, rz and one spread per
/// digit with a base Side joint ("spread_<digit>").
DesignSpace grasp_space(const HandModel& hand, const PerturbBounds& bounds);

/// t_grasp = tool.wrist * perturbation; preshape from the spreads.
GraspConfig grasp_from_point(const HandModel& hand, const ToolModel& tool, const DesignPoint& p);

GraspConfig sample_grasp(const HandModel& hand, const ToolModel& tool, const PerturbBounds& bounds,
                         std::uint64_t seed);

struct GraspResult {
  GraspConfig config;
  ContactSet contacts;
  StabilityScore score;
};

GraspResult evaluate_grasp(const HandModel& hand, const ToolModel& tool, const GraspConfig& g,
                           const GraspSettings& settings);

struct GraspSearch {
  GraspResult best;
  std::vector<TrialRecord> history;  // score = S_t per trial
};

/// TPE over grasp_space with objective S_t. Deterministic given the seed.
GraspSearch optimize_grasp(const HandModel& hand, const ToolModel& tool, int budget, std::uint64_t seed,
                           const GraspSettings& settings);

}  // namespace handco
