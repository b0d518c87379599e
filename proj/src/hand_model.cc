#include "handco/hand_model.h"

#include <array>

#include "handco/errors.h"

namespace handco {

std::size_t HandModel::joint_count() const {
  std::size_t n = 0;
  for (const auto& c : chains) n += c.dof();
  return n;
}

std::size_t HandModel::link_count() const {
  std::size_t n = 1;
  for (const auto& c : chains) n += c.links.size();
  return n;
}

std::vector<std::string> digit_names(int finger_number) {
  if (finger_number == 3) return {"index", "middle", "pinky", "thumb"};
  if (finger_number == 2) return {"index", "pinky", "thumb"};
  throw ConfigError("finger_number must be 2 or 3");
}

PalmExtrusion extrude_palm(const Polygon2D& outline, double thickness) {
  return {extrude_polygon(outline, thickness), outline, thickness};
}

HandModel assemble_hand(const DesignPoint& point, const HandOptions& opts) {
  const DesignSpace space = build_power_grasp_space();
  try {
    space.validate(point);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("invalid design: ") + e.what());
  }

  HandModel model;
  model.design = point;
  const int fingers = std::stoi(point.choice("finger_number"));
  const auto digits = digit_names(fingers);

  PalmBody& palm = model.palm;
  palm.thickness = opts.palm.thickness;
  palm.initial_outline = build_outline(opts.palm.size, opts.palm.sides, opts.palm.aspect);

  std::vector<BaseAssignment> assignments;
  for (const auto& d : digits) {
    BaseAssignment a;
    a.digit = d;
    a.arc = opts.arcs.at(d);
    a.pose.width = opts.base_width;
    if (d == "middle") {
      a.pose.normal_offset = point.number("middle_normal_offset");
    } else {
      a.pose.angle_deg = point.number(d + "_angle");
      a.pose.normal_offset = point.number(d + "_normal_offset");
      a.pose.side_offset = point.number(d + "_side_offset");
    }
    assignments.push_back(a);
  }
  model.frames = place_bases(palm.initial_outline, assignments, palm.thickness);

  try {
    palm.outline = finalize_outline(palm.initial_outline, model.frames);
  } catch (const InfeasibleDesign& e) {
    model.feasible = false;
    model.infeasible_reason = e.what();
    return model;
  }

  PadSpec pad;
  pad.max_height = point.number("pad_max_height");
  pad.resolution = opts.pad_resolution;
  for (const char* k : {"k0", "k1"}) {
    const std::string p = k;
    pad.kernels.push_back({point.number(p + "_center_angle"), point.number(p + "_center_offset"),
                           point.number(p + "_spread"), point.number(p + "_intensity")});
  }
  palm.pad = deform_pad(flat_pad(palm.outline, palm.initial_outline, pad.resolution), pad);

  Pose lift = Pose::Identity();
  lift.translation() = Vec3(0, 0, palm.thickness);
  palm.mesh = transformed(pad_solid(palm.pad, palm.thickness), lift);
  for (auto& piece : decompose_pad(palm.pad, palm.thickness)) {
    palm.colliders.push_back(ConvexPiece{transformed(piece.mesh, lift)});
  }
  palm.mass = mass_props(palm.mesh);

  const std::array<double, 4> added = {point.number("link0_added"), point.number("link1_added"),
                                       point.number("link2_added"), point.number("link3_added")};
  const Vec3 tip(1.0, point.number("tip_scale_y"), point.number("tip_scale_z"));
  for (std::size_t i = 0; i < digits.size(); ++i) {
    const bool thumb = digits[i] == "thumb";
    const FingerCode code =
        parse_finger_code(point.choice(thumb ? "thumb_code" : "finger_code"), thumb);
    model.chains.push_back(build_chain(expand_structure(code, added, tip), model.frames[i]));
  }
  return model;
}

DesignPoint default_design() {
  DesignPoint p;
  p.space_id = "power_grasp_v1";
  p.values = {
      {"finger_number", std::string("3")},
      {"finger_code", std::string("1-1-1")},
      {"thumb_code", std::string("1-22")},
      {"index_angle", 0.0},
      {"pinky_angle", 0.0},
      {"index_normal_offset", 0.0},
      {"middle_normal_offset", 0.0},
      {"pinky_normal_offset", 0.0},
      {"index_side_offset", 0.0},
      {"pinky_side_offset", 0.0},
      {"thumb_angle", 0.0},
      {"thumb_normal_offset", 0.0},
      {"thumb_side_offset", 0.0},
      {"pad_max_height", 0.0},
      {"k0_spread", 0.15},
      {"k0_center_angle", 0.0},
      {"k0_center_offset", 0.0},
      {"k0_intensity", 0.0},
      {"k1_spread", 0.15},
      {"k1_center_angle", 0.0},
      {"k1_center_offset", 0.0},
      {"k1_intensity", 0.0},
      {"tip_scale_y", 1.0},
      {"tip_scale_z", 1.0},
      {"link0_added", 0.0},
      {"link1_added", 0.0},
      {"link2_added", 0.0},
      {"link3_added", 0.0},
  };
  return p;
}

}  // namespace handco
