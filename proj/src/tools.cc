#include "handco/tools.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "handco/errors.h"

namespace handco {
namespace {

Pose at(const Vec3& t) {
  Pose p = Pose::Identity();
  p.translation() = t;
  return p;
}

// Canonical grasp: the handle runs along palm x with the tool's +x end (head,
// bowl, blade) out past the index side, 5 mm above the straight fingers and
// across the first flexion joints (palm y = 100 mm), so the first flexing
// link meets the handle before the tips curl over it.
Pose wrist_for_handle(double half_height) {
  constexpr double kFingerTop = 25.0;  // palm top 18 mm + half link height 7 mm
  Pose tool_in_palm = Pose::Identity();
  tool_in_palm.linear() = Eigen::AngleAxisd(std::numbers::pi, Vec3::UnitZ()).toRotationMatrix();
  tool_in_palm.translation() = Vec3(-5.0, 100.0, kFingerTop + 5.0 + half_height);
  return tool_in_palm.inverse();
}

std::string shape_name(Shape s) {
  switch (s) {
    case Shape::kBox: return "box";
    case Shape::kCylinder: return "cylinder";
    case Shape::kCapsule: return "capsule";
  }
  return "?";
}

Shape shape_from_name(const std::string& s) {
  if (s == "box") return Shape::kBox;
  if (s == "cylinder") return Shape::kCylinder;
  if (s == "capsule") return Shape::kCapsule;
  throw ConfigError("unknown primitive shape '" + s + "'");
}

}  // namespace

double Primitive::sdf(const Vec3& p_tool) const {
  const Vec3 p = pose.inverse() * p_tool;
  switch (shape) {
    case Shape::kBox: {
      const Vec3 q = p.cwiseAbs() - dims / 2.0;
      return q.cwiseMax(0.0).norm() + std::min(q.maxCoeff(), 0.0);
    }
    case Shape::kCylinder: {
      const Vec2 d(std::abs(p.x()) - dims.x() / 2.0, std::hypot(p.y(), p.z()) - dims.y());
      return std::min(std::max(d.x(), d.y()), 0.0) + d.cwiseMax(0.0).norm();
    }
    case Shape::kCapsule: {
      const double hl = dims.x() / 2.0;
      const Vec3 c(std::clamp(p.x(), -hl, hl), 0.0, 0.0);
      return (p - c).norm() - dims.y();
    }
  }
  return 0.0;
}

double ToolModel::bounding_radius() const {
  double r = 0.0;
  for (const auto& p : primitives) {
    double local = 0.0;
    switch (p.shape) {
      case Shape::kBox: local = p.dims.norm() / 2.0; break;
      case Shape::kCylinder: local = std::hypot(p.dims.x() / 2.0, p.dims.y()); break;
      case Shape::kCapsule: local = p.dims.x() / 2.0 + p.dims.y(); break;
    }
    r = std::max(r, p.pose.translation().norm() + local);
  }
  return r;
}

double ToolModel::sdf(const Vec3& p_tool) const {
  double d = std::numeric_limits<double>::infinity();
  for (const auto& p : primitives) d = std::min(d, p.sdf(p_tool));
  return d;
}

Vec3 ToolModel::normal(const Vec3& p_tool) const {
  constexpr double h = 1e-4;
  Vec3 g;
  for (int k = 0; k < 3; ++k) {
    Vec3 e = Vec3::Zero();
    e(k) = h;
    g(k) = sdf(p_tool + e) - sdf(p_tool - e);
  }
  const double n = g.norm();
  return n > 0 ? Vec3(g / n) : Vec3(Vec3::UnitZ());
}

std::vector<ToolModel> builtin_tools() {
  std::vector<ToolModel> tools;

  ToolModel hammer;
  hammer.name = "hammer";
  hammer.mass = 0.55;
  hammer.primitives.push_back({Shape::kCylinder, Pose::Identity(), Vec3(250.0, 12.5, 0.0)});
  hammer.primitives.push_back({Shape::kBox, at(Vec3(125.0, 0.0, 0.0)), Vec3(30.0, 30.0, 90.0)});
  hammer.wrist = wrist_for_handle(12.5);
  tools.push_back(hammer);

  ToolModel spoon;
  spoon.name = "spoon";
  spoon.mass = 0.05;
  spoon.primitives.push_back({Shape::kCapsule, Pose::Identity(), Vec3(180.0, 6.0, 0.0)});
  spoon.primitives.push_back({Shape::kCapsule, at(Vec3(120.0, 0.0, 0.0)), Vec3(30.0, 16.0, 0.0)});
  spoon.wrist = wrist_for_handle(6.0);
  tools.push_back(spoon);

  ToolModel knife;
  knife.name = "knife";
  knife.mass = 0.09;
  knife.primitives.push_back({Shape::kBox, Pose::Identity(), Vec3(130.0, 22.0, 16.0)});
  knife.primitives.push_back({Shape::kBox, at(Vec3(125.0, 0.0, 0.0)), Vec3(120.0, 2.0, 24.0)});
  knife.wrist = wrist_for_handle(8.0);
  tools.push_back(knife);
  return tools;
}

ToolModel builtin_tool(const std::string& name) {
  for (auto& t : builtin_tools()) {
    if (t.name == name) return t;
  }
  throw ConfigError("unknown tool '" + name + "' (expected hammer, spoon or knife)");
}

nlohmann::json pose_to_json(const Pose& p) {
  const Eigen::Quaterniond q(p.linear());
  const Vec3 t = p.translation();
  return {{"xyz", {t.x(), t.y(), t.z()}}, {"quat_wxyz", {q.w(), q.x(), q.y(), q.z()}}};
}

Pose pose_from_json(const nlohmann::json& j) {
  const auto& t = j.at("xyz");
  const auto& q = j.at("quat_wxyz");
  Eigen::Quaterniond quat(q.at(0).get<double>(), q.at(1).get<double>(), q.at(2).get<double>(),
                          q.at(3).get<double>());
  if (std::abs(quat.norm() - 1.0) > 1e-6) throw ConfigError("pose quaternion is not unit length");
  Pose p = Pose::Identity();
  p.linear() = quat.normalized().toRotationMatrix();
  p.translation() = Vec3(t.at(0).get<double>(), t.at(1).get<double>(), t.at(2).get<double>());
  return p;
}

nlohmann::json to_json(const ToolModel& tool) {
  nlohmann::json prims = nlohmann::json::array();
  for (const auto& p : tool.primitives) {
    prims.push_back({{"shape", shape_name(p.shape)},
                     {"pose", pose_to_json(p.pose)},
                     {"dims", {p.dims.x(), p.dims.y(), p.dims.z()}}});
  }
  return {{"name", tool.name}, {"mass", tool.mass}, {"wrist", pose_to_json(tool.wrist)},
          {"primitives", prims}};
}

ToolModel tool_from_json(const nlohmann::json& j) {
  try {
    ToolModel t;
    t.name = j.at("name").get<std::string>();
    t.mass = j.at("mass").get<double>();
    t.wrist = pose_from_json(j.at("wrist"));
    for (const auto& jp : j.at("primitives")) {
      Primitive p;
      p.shape = shape_from_name(jp.at("shape").get<std::string>());
      p.pose = pose_from_json(jp.at("pose"));
      const auto& d = jp.at("dims");
      p.dims = Vec3(d.at(0).get<double>(), d.at(1).get<double>(), d.at(2).get<double>());
      t.primitives.push_back(p);
    }
    if (t.primitives.empty()) throw ConfigError("tool '" + t.name + "' has no primitives");
    if (!(t.mass > 0)) throw ConfigError("tool '" + t.name + "' has non-positive mass");
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed tool document: ") + e.what());
  }
}

}  // namespace handco
