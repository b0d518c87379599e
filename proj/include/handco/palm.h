#pragma once

#include <span>
#include <string>
#include <vector>

#include "handco/mesh.h"
#include "handco/polygon.h"

namespace handco {

/// Placement of one digit base relative to its nominal outline point.
struct BasePoseParams {
  double angle_deg = 0.0;      // heading rotation about the palm normal
  double normal_offset = 0.0;  // mm along the outward normal
  double side_offset = 0.0;    // mm along the CCW outline tangent
  double width = 22.0;         // mm, base segment width
};

struct PalmParams {
  double size = 120.0;  // mm, ellipse major diameter
  int sides = 6;
  double aspect = 1.0;
  double thickness = 18.0;  // mm
};

struct BaseAssignment {
  std::string digit;
  double arc = 0.0;  // normalized perimeter position in [0, 1)
  BasePoseParams pose;
};

/// Attachment frame for a finger chain: x = heading, z = palm normal.
struct BaseFrame {
  std::string digit;
  Vec3 origin = Vec3::Zero();
  Eigen::Quaterniond rotation = Eigen::Quaterniond::Identity();
  Vec2 anchor = Vec2::Zero();  // undisplaced outline point
  double width = 22.0;

  Pose pose() const;
};

Polygon2D build_outline(double size, int sides, double aspect);

std::vector<BaseFrame> place_bases(const Polygon2D& outline,
                                   std::span<const BaseAssignment> assignments, double top_z);

/// Union of the outline with one rectangle per displaced base, followed by
/// collinear pruning and removal of edges shorter than `min_feature` mm.
/// Throws InfeasibleDesign when the union is not a single polygon.
Polygon2D finalize_outline(const Polygon2D& outline, std::span<const BaseFrame> frames,
                           double min_feature = 1.0);

}  // namespace handco
