#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "handco/hand_model.h"

namespace handco {

inline constexpr double kJointEffort = 2.0;    // N m
inline constexpr double kJointVelocity = 5.0;  // rad/s

struct ExportResult {
  std::filesystem::path urdf;
  std::vector<std::filesystem::path> mesh_files;  // relative to the export dir
  std::size_t links = 0;
  std::size_t joints = 0;
};

/// Throws InvariantViolation when the model is infeasible, a visual mesh is
/// not watertight, or a collider is not convex.
void check_exportable(const HandModel& model);

/// URDF text. Mesh paths are relative to the export directory; lengths in
/// metres, angles in radians.
std::string urdf_xml(const HandModel& model);

/// Writes hand.urdf and meshes/{visual,collision}/*.stl under `dir`. All
/// checks run before the first file is written.
ExportResult export_urdf(const HandModel& model, const std::filesystem::path& dir);

/// Rotation matrix as URDF fixed-axis roll/pitch/yaw.
Vec3 rpy_from_matrix(const Mat3& r);

}  // namespace handco
