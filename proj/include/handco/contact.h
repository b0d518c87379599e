#pragma once

#include <optional>
#include <string>
#include <vector>

#include "handco/hand_model.h"
#include "handco/tools.h"

namespace handco {

struct Contact {
  Vec3 point = Vec3::Zero();        // object frame, mm
  Vec3 normal = Vec3::UnitZ();      // unit, into the object
  double mu = 0.8;
  double cap = 8.0;                 // N, max normal force
  std::optional<Vec3> tangent;      // first friction-cone axis; derived from the normal if unset
  std::string link;
  double distance = 0.0;            // mm, link-to-surface gap at termination
};

struct ContactSet {
  std::vector<Contact> contacts;
  bool feasible = true;
  std::vector<std::vector<double>> q;  // final joint angles (deg) per chain
};

/// Wrist pose in the object frame plus preshape.
struct GraspConfig {
  Pose t_grasp = Pose::Identity();
  std::vector<std::vector<double>> q0;  // deg per chain
  std::vector<double> spread;           // deg per chain, applied to the base Side joint
};

struct ClosingOptions {
  double step_deg = 1.0;
  double tolerance = 0.5;  // mm
  double mu = 0.8;
  double cap = 8.0;        // N
};

/// Closing joints of a chain: Grasp joints for fingers, the added group joints
/// for thumbs.
std::vector<int> closing_joints(const FingerChain& chain);

/// Index of the Side joint that belongs to the chain's base rotation mode, or
/// -1.
int base_side_joint(const FingerChain& chain);

/// Open preshape: zeros, spread on each base Side joint, thumb opposition
/// roll (+90 deg) on an Axial mode joint.
std::vector<std::vector<double>> preshape(const HandModel& hand, const std::vector<double>& spread);

/// Signed distance from the posed hand to the tool, per body (palm first, then
/// chain links in order).
struct BodyDistance {
  std::string link;
  double distance = 0.0;
  Vec3 witness = Vec3::Zero();  // hand point attaining it, object frame
  Vec3 axis = Vec3::UnitX();    // body x axis, object frame
};
std::vector<BodyDistance> hand_distances(const HandModel& hand, const ToolModel& tool,
                                         const Pose& t_grasp,
                                         const std::vector<std::vector<double>>& q_deg);

ContactSet close_fingers(const HandModel& hand, const ToolModel& tool, const GraspConfig& g,
                         const ClosingOptions& opts = {});

}  // namespace handco
