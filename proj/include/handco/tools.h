#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "handco/polygon.h"

namespace handco {

enum class Shape { kBox, kCylinder, kCapsule };

/// Solid primitive in the tool frame. The primitive's own axis is its local x.
///   box:      dims = full extents (x, y, z)
///   cylinder: dims = (length, radius, unused)
///   capsule:  dims = (segment length, radius, unused); length 0 is a sphere
struct Primitive {
  Shape shape = Shape::kBox;
  Pose pose = Pose::Identity();
  Vec3 dims = Vec3::Zero();

  /// Signed distance in mm, negative inside.
  double sdf(const Vec3& p_tool) const;
};

struct ToolModel {
  std::string name;
  std::vector<Primitive> primitives;
  double mass = 0.0;  // kg
  /// Palm frame expressed in the tool frame for the canonical grasp.
  Pose wrist = Pose::Identity();
  /// Radius of a sphere about the tool origin enclosing every primitive.
  double bounding_radius() const;

  double sdf(const Vec3& p_tool) const;
  /// Unit outward normal (central-difference gradient of the SDF).
  Vec3 normal(const Vec3& p_tool) const;
};

/// hammer, spoon, knife.
std::vector<ToolModel> builtin_tools();
ToolModel builtin_tool(const std::string& name);

nlohmann::json to_json(const ToolModel& tool);
ToolModel tool_from_json(const nlohmann::json& j);

nlohmann::json pose_to_json(const Pose& p);
Pose pose_from_json(const nlohmann::json& j);

}  // namespace handco
