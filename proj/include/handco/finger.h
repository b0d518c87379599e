#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "handco/mesh.h"
#include "handco/palm.h"

namespace handco {

enum class JointType { Grasp, Side, Axial };

std::string_view to_string(JointType t);

/// Parsed structure code: MODE ("-" GROUP)*.
struct FingerCode {
  int mode = 0;
  std::vector<std::string> groups;
  bool is_thumb = false;
};

struct JointSpec {
  JointType type = JointType::Grasp;
  Vec3 axis = Vec3::UnitY();  // in the joint frame
  double lo_deg = 0.0;
  double hi_deg = 0.0;
  std::string id;
};

/// Joint axis and limits for a joint type. Grasp flexes towards the base +z.
JointSpec joint_for(JointType t);

struct FingerStructure {
  std::vector<JointSpec> joints;
  std::vector<double> link_lengths;  // mm, link following each joint
  bool is_thumb = false;
  int mode_joints = 0;  // leading joints produced by the rotation mode
  Vec3 tip_scale = Vec3::Ones();
};

/// Proximal-to-distal link lengths before added lengths, mm.
inline constexpr std::array<double, 4> kBaseLinkProfile = {45.0, 32.0, 26.0, 22.0};
inline constexpr int kMaxJoints = 6;

struct LinkBody {
  std::string name;
  double length = 0.0;
  TriMesh mesh;                      // link frame
  std::vector<ConvexPiece> colliders;  // link frame
  MassProps mass;                    // link frame
};

/// Link i hangs off joint i. Joint i sits at the base frame for i = 0 and at
/// (length_{i-1}, 0, 0) in link i-1 otherwise.
struct FingerChain {
  std::string digit;
  bool is_thumb = false;
  int mode_joints = 0;
  Pose base = Pose::Identity();
  std::vector<JointSpec> joints;
  std::vector<LinkBody> links;

  std::size_t dof() const { return joints.size(); }
};

/// Throws ConfigError on malformed codes.
FingerCode parse_finger_code(std::string_view code, bool is_thumb);

std::vector<JointType> joint_types(const FingerCode& code);

/// `added_lengths` holds one value per profile slot; link i uses slot
/// min(i, 3). Throws ConfigError beyond kMaxJoints.
FingerStructure expand_structure(const FingerCode& code, std::span<const double> added_lengths,
                                 const Vec3& tip_scale);

FingerChain build_chain(const FingerStructure& s, const BaseFrame& base);

/// Pose of each link frame for joint angles `q` (radians), in the frame the
/// base pose is expressed in.
std::vector<Pose> forward_kinematics(const FingerChain& chain, std::span<const double> q);

/// Distal end of the last link.
Vec3 tip_position(const FingerChain& chain, std::span<const Pose> link_poses);

/// Rounded-box link (straight) or capped fingertip, starting at x = 0 and
/// ending at x = length, centred on the x axis.
TriMesh link_mesh(double length, bool fingertip, const Vec3& tip_scale = Vec3::Ones());

inline constexpr double kLinkWidth = 20.0;
inline constexpr double kLinkHeight = 14.0;

}  // namespace handco
