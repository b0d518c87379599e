#include "handco/urdf.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "handco/errors.h"

namespace handco {
namespace fs = std::filesystem;
namespace {

constexpr double kMm = 1e-3;

std::string num(double v, int digits = 10) {
  if (v == 0.0) v = 0.0;  // drop negative zero
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

// Joint limits round-trip exactly.
std::string exact(double v) { return num(v, 17); }

std::string vec(const Vec3& v) { return num(v.x()) + " " + num(v.y()) + " " + num(v.z()); }

std::string origin(const Vec3& xyz_m, const Vec3& rpy) {
  return "<origin xyz=\"" + vec(xyz_m) + "\" rpy=\"" + vec(rpy) + "\"/>";
}

struct LinkFiles {
  std::string name;
  const TriMesh* visual;
  const std::vector<ConvexPiece>* colliders;
  const MassProps* mass;
};

std::vector<LinkFiles> link_files(const HandModel& m) {
  std::vector<LinkFiles> out;
  out.push_back({"palm", &m.palm.mesh, &m.palm.colliders, &m.palm.mass});
  for (const auto& c : m.chains) {
    for (const auto& l : c.links) out.push_back({l.name, &l.mesh, &l.colliders, &l.mass});
  }
  return out;
}

std::string visual_path(const std::string& link) { return "meshes/visual/" + link + ".stl"; }
std::string collision_path(const std::string& link, std::size_t i) {
  return "meshes/collision/" + link + "_" + std::to_string(i) + ".stl";
}

void write_link(std::ostringstream& x, const LinkFiles& l) {
  const std::string scale = "scale=\"" + num(kMm) + " " + num(kMm) + " " + num(kMm) + "\"";
  x << "  <link name=\"" << l.name << "\">\n";
  x << "    <inertial>\n";
  x << "      " << origin(l.mass->com * kMm, Vec3::Zero()) << "\n";
  x << "      <mass value=\"" << num(l.mass->mass) << "\"/>\n";
  const Mat3 i = l.mass->inertia * kMm * kMm;
  x << "      <inertia ixx=\"" << num(i(0, 0)) << "\" ixy=\"" << num(i(0, 1)) << "\" ixz=\""
    << num(i(0, 2)) << "\" iyy=\"" << num(i(1, 1)) << "\" iyz=\"" << num(i(1, 2)) << "\" izz=\""
    << num(i(2, 2)) << "\"/>\n";
  x << "    </inertial>\n";
  x << "    <visual>\n      " << origin(Vec3::Zero(), Vec3::Zero()) << "\n";
  x << "      <geometry><mesh filename=\"" << visual_path(l.name) << "\" " << scale
    << "/></geometry>\n    </visual>\n";
  for (std::size_t k = 0; k < l.colliders->size(); ++k) {
    x << "    <collision>\n      " << origin(Vec3::Zero(), Vec3::Zero()) << "\n";
    x << "      <geometry><mesh filename=\"" << collision_path(l.name, k) << "\" " << scale
      << "/></geometry>\n    </collision>\n";
  }
  x << "  </link>\n";
}

}  // namespace

Vec3 rpy_from_matrix(const Mat3& r) {
  const double pitch = std::asin(std::clamp(-r(2, 0), -1.0, 1.0));
  if (std::abs(r(2, 0)) > 1.0 - 1e-12) {
    // Gimbal lock: fold yaw into roll.
    return Vec3(std::atan2(-r(1, 2), r(1, 1)), pitch, 0.0);
  }
  return Vec3(std::atan2(r(2, 1), r(2, 2)), pitch, std::atan2(r(1, 0), r(0, 0)));
}

void check_exportable(const HandModel& model) {
  if (!model.feasible) throw InvariantViolation("cannot export infeasible design: " + model.infeasible_reason);
  for (const auto& l : link_files(model)) {
    if (!watertight_check(*l.visual)) throw InvariantViolation("visual mesh of " + l.name + " is not watertight");
    if (l.colliders->empty()) throw InvariantViolation(l.name + " has no collider");
    for (const auto& c : *l.colliders) {
      if (!is_convex(c.mesh)) throw InvariantViolation("collider of " + l.name + " is not convex");
    }
    if (!(l.mass->mass > 0)) throw InvariantViolation(l.name + " has non-positive mass");
  }
}

std::string urdf_xml(const HandModel& model) {
  std::ostringstream x;
  x << "<?xml version=\"1.0\"?>\n";
  x << "<robot name=\"" << model.name << "\">\n";
  for (const auto& l : link_files(model)) write_link(x, l);
  for (const auto& c : model.chains) {
    for (std::size_t i = 0; i < c.joints.size(); ++i) {
      const auto& j = c.joints[i];
      const std::string parent = i == 0 ? "palm" : c.links[i - 1].name;
      Vec3 xyz = Vec3(c.links[i == 0 ? 0 : i - 1].length, 0, 0) * kMm;
      Vec3 rpy = Vec3::Zero();
      if (i == 0) {
        xyz = c.base.translation() * kMm;
        rpy = rpy_from_matrix(c.base.linear());
      }
      x << "  <joint name=\"" << j.id << "\" type=\"revolute\">\n";
      x << "    <parent link=\"" << parent << "\"/>\n";
      x << "    <child link=\"" << c.links[i].name << "\"/>\n";
      x << "    " << origin(xyz, rpy) << "\n";
      x << "    <axis xyz=\"" << vec(j.axis) << "\"/>\n";
      x << "    <limit lower=\"" << exact(j.lo_deg * std::numbers::pi / 180.0) << "\" upper=\""
        << exact(j.hi_deg * std::numbers::pi / 180.0) << "\" effort=\"" << num(kJointEffort)
        << "\" velocity=\"" << num(kJointVelocity) << "\"/>\n";
      x << "  </joint>\n";
    }
  }
  x << "</robot>\n";
  return x.str();
}

ExportResult export_urdf(const HandModel& model, const fs::path& dir) {
  check_exportable(model);
  const std::string xml = urdf_xml(model);
  std::vector<std::pair<std::string, std::string>> files;  // relative path, bytes
  for (const auto& l : link_files(model)) {
    files.emplace_back(visual_path(l.name), stl_bytes(*l.visual, l.name));
    for (std::size_t k = 0; k < l.colliders->size(); ++k) {
      files.emplace_back(collision_path(l.name, k), stl_bytes((*l.colliders)[k].mesh, l.name));
    }
  }

  fs::create_directories(dir / "meshes" / "visual");
  fs::create_directories(dir / "meshes" / "collision");
  auto write = [&](const fs::path& p, const std::string& bytes) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("failed to write " + p.string());
  };
  ExportResult r;
  r.urdf = dir / "hand.urdf";
  write(r.urdf, xml);
  for (const auto& [rel, bytes] : files) {
    write(dir / rel, bytes);
    r.mesh_files.emplace_back(rel);
  }
  r.links = model.link_count();
  r.joints = model.joint_count();
  return r;
}

}  // namespace handco
