#pragma once

#include <map>
#include <string>
#include <vector>

#include "handco/design_space.h"
#include "handco/finger.h"
#include "handco/palm.h"
#include "handco/surface.h"

namespace handco {

/// Fixed (non-optimized) generation settings.
struct HandOptions {
  PalmParams palm;
  int pad_resolution = 16;
  double base_width = 22.0;
  // Nominal arc positions: fingers spread over the top quarter of the
  // outline, thumb at the middle of the right quarter.
  std::map<std::string, double> arcs = {
      {"pinky", 0.1875}, {"middle", 0.25}, {"index", 0.3125}, {"thumb", 0.0}};
};

struct PalmBody {
  Polygon2D initial_outline;
  Polygon2D outline;  // finalized, the pad footprint
  PadMesh pad;        // deformed, z relative to the top face
  TriMesh mesh;       // palm frame, bottom face at z = 0
  std::vector<ConvexPiece> colliders;
  MassProps mass;
  double thickness = 0.0;
};

struct HandModel {
  std::string name = "hand";
  DesignPoint design;
  bool feasible = true;
  std::string infeasible_reason;
  PalmBody palm;
  std::vector<BaseFrame> frames;
  std::vector<FingerChain> chains;  // thumb last

  std::size_t joint_count() const;
  std::size_t link_count() const;  // palm included
};

/// Digit names in chain order for a finger count.
std::vector<std::string> digit_names(int finger_number);

/// Palm top face (extruded outline) tagged with its pad region.
struct PalmExtrusion {
  TriMesh mesh;
  Polygon2D top_face;
  double top_z = 0.0;
};
PalmExtrusion extrude_palm(const Polygon2D& outline, double thickness);

/// Deterministic generation pipeline. An outline that cannot be finalized
/// yields a model with feasible = false instead of throwing.
HandModel assemble_hand(const DesignPoint& point, const HandOptions& opts = {});

/// A central, fully specified design for the power-grasp space.
DesignPoint default_design();

}  // namespace handco
