#include <gtest/gtest.h>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <set>

#include "handco/errors.h"
#include "handco/hand_model.h"
#include "handco/urdf.h"

using namespace handco;
namespace fs = std::filesystem;
namespace pt = boost::property_tree;

namespace {

fs::path temp_dir(const std::string& name) {
  fs::path d = fs::temp_directory_path() / ("handco_export_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::string all_mesh_bytes(const HandModel& h) {
  std::string out = stl_bytes(h.palm.mesh);
  for (const auto& c : h.palm.colliders) out += stl_bytes(c.mesh);
  for (const auto& ch : h.chains) {
    for (const auto& l : ch.links) {
      out += stl_bytes(l.mesh);
      for (const auto& c : l.colliders) out += stl_bytes(c.mesh);
    }
  }
  return out;
}

struct ParsedUrdf {
  std::set<std::string> links;
  std::vector<std::string> mesh_files;
  struct Joint {
    std::string name, type, parent, child;
    double lower = 0, upper = 0;
  };
  std::vector<Joint> joints;
};

ParsedUrdf parse(const fs::path& file) {
  pt::ptree tree;
  pt::read_xml(file.string(), tree);
  ParsedUrdf out;
  for (const auto& [tag, node] : tree.get_child("robot")) {
    if (tag == "link") {
      out.links.insert(node.get<std::string>("<xmlattr>.name"));
      for (const auto& [kind, geom] : node) {
        if (kind == "visual" || kind == "collision") {
          out.mesh_files.push_back(geom.get<std::string>("geometry.mesh.<xmlattr>.filename"));
        }
      }
    } else if (tag == "joint") {
      ParsedUrdf::Joint j;
      j.name = node.get<std::string>("<xmlattr>.name");
      j.type = node.get<std::string>("<xmlattr>.type");
      j.parent = node.get<std::string>("parent.<xmlattr>.link");
      j.child = node.get<std::string>("child.<xmlattr>.link");
      j.lower = node.get<double>("limit.<xmlattr>.lower");
      j.upper = node.get<double>("limit.<xmlattr>.upper");
      out.joints.push_back(j);
    }
  }
  return out;
}

}  // namespace

TEST(Assemble, Deterministic) {
  const DesignSpace space = build_power_grasp_space();
  HandOptions opts;
  opts.pad_resolution = 8;
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    const DesignPoint p = sample_uniform(space, seed);
    const HandModel a = assemble_hand(p, opts), b = assemble_hand(p, opts);
    ASSERT_EQ(a.feasible, b.feasible);
    if (a.feasible) {
      EXPECT_EQ(all_mesh_bytes(a), all_mesh_bytes(b)) << seed;
    }
  }
}

TEST(Assemble, FingerNumberSelectsChains) {
  DesignPoint p = default_design();
  const HandModel three = assemble_hand(p);
  ASSERT_EQ(three.chains.size(), 4u);
  EXPECT_EQ(three.chains.back().digit, "thumb");
  p.values["finger_number"] = std::string("2");
  p.values.erase("middle_normal_offset");
  const HandModel two = assemble_hand(p);
  ASSERT_EQ(two.chains.size(), 3u);
  for (const auto& c : two.chains) EXPECT_NE(c.digit, "middle");
}

TEST(Assemble, JointCountsFollowStructureTables) {
  const HandModel h = assemble_hand(default_design());  // "1-1-1" fingers, "1-22" thumb
  EXPECT_EQ(h.joint_count(), 3u * 4u + 4u);
  EXPECT_EQ(h.link_count(), 1u + 3u * 4u + 4u);

  // Single-Grasp fingers with a mode-0 thumb: the thumb keeps only its
  // lateral base joint.
  const std::array<double, 4> zero = {0, 0, 0, 0};
  std::size_t joints = 0;
  for (int f = 0; f < 3; ++f) joints += expand_structure(parse_finger_code("0", false), zero, Vec3::Ones()).joints.size();
  joints += expand_structure(parse_finger_code("0", true), zero, Vec3::Ones()).joints.size();
  EXPECT_EQ(joints, 3u * 1u + 1u);
}

TEST(Assemble, InvalidPointIsConfigError) {
  DesignPoint p = default_design();
  p.values.erase("thumb_angle");
  EXPECT_THROW(assemble_hand(p), ConfigError);
}

TEST(Export, InfeasibleModelIsRejectedBeforeWriting) {
  HandModel h = assemble_hand(default_design());
  h.feasible = false;
  h.infeasible_reason = "test";
  const fs::path dir = temp_dir("infeasible") / "out";
  EXPECT_THROW(export_urdf(h, dir), InvariantViolation);
  EXPECT_FALSE(fs::exists(dir));
  fs::remove_all(dir.parent_path());
}

TEST(Export, ReparsedUrdfMatchesModel) {
  const HandModel h = assemble_hand(default_design());
  const fs::path dir = temp_dir("reparse");
  const ExportResult r = export_urdf(h, dir);
  const ParsedUrdf u = parse(r.urdf);
  EXPECT_EQ(u.links.size(), h.link_count());
  EXPECT_EQ(u.joints.size(), h.joint_count());
  EXPECT_TRUE(u.links.contains("palm"));

  // Single root, acyclic: every link but the palm is the child of exactly one joint.
  std::map<std::string, int> child_of;
  for (const auto& j : u.joints) {
    EXPECT_EQ(j.type, "revolute");
    EXPECT_TRUE(u.links.contains(j.parent)) << j.name;
    EXPECT_TRUE(u.links.contains(j.child)) << j.name;
    ++child_of[j.child];
  }
  for (const auto& l : u.links) EXPECT_EQ(child_of[l], l == "palm" ? 0 : 1) << l;

  // Mesh references resolve, load, and collision meshes are convex.
  for (const auto& rel : u.mesh_files) {
    ASSERT_TRUE(fs::exists(dir / rel)) << rel;
    const TriMesh m = read_stl(dir / rel);
    EXPECT_FALSE(m.empty());
    if (rel.rfind("meshes/collision/", 0) == 0) {
      EXPECT_TRUE(is_convex(m, 1e-4)) << rel;
    }
  }
  EXPECT_EQ(u.mesh_files.size(), r.mesh_files.size());
  fs::remove_all(dir);
}

TEST(Export, LimitsInRadians) {
  const HandModel h = assemble_hand(default_design());
  const fs::path dir = temp_dir("limits");
  const ParsedUrdf u = parse(export_urdf(h, dir).urdf);
  std::map<std::string, JointSpec> specs;
  for (const auto& c : h.chains) {
    for (const auto& j : c.joints) specs[j.id] = j;
  }
  ASSERT_EQ(specs.size(), u.joints.size());
  for (const auto& j : u.joints) {
    const JointSpec& s = specs.at(j.name);
    EXPECT_NEAR(j.lower, s.lo_deg * std::numbers::pi / 180.0, 1e-12) << j.name;
    EXPECT_NEAR(j.upper, s.hi_deg * std::numbers::pi / 180.0, 1e-12) << j.name;
  }
  fs::remove_all(dir);
}

TEST(Export, ReexportIsByteIdentical) {
  const HandModel h = assemble_hand(sample_uniform(build_power_grasp_space(), 17));
  ASSERT_TRUE(h.feasible);
  const fs::path a = temp_dir("idem_a"), b = temp_dir("idem_b");
  const ExportResult ra = export_urdf(h, a);
  export_urdf(assemble_hand(h.design), b);
  EXPECT_EQ(slurp(a / "hand.urdf"), slurp(b / "hand.urdf"));
  for (const auto& rel : ra.mesh_files) EXPECT_EQ(slurp(a / rel), slurp(b / rel)) << rel;
  // Exporting again into the same directory changes nothing.
  const std::string before = slurp(a / "hand.urdf");
  export_urdf(h, a);
  EXPECT_EQ(slurp(a / "hand.urdf"), before);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Export, RpyRoundTrip) {
  for (double r : {-2.0, -0.3, 0.0, 1.1}) {
    for (double p : {-1.2, 0.0, 0.7}) {
      for (double y : {-3.0, 0.0, 2.5}) {
        const Mat3 m = (Eigen::AngleAxisd(y, Vec3::UnitZ()) * Eigen::AngleAxisd(p, Vec3::UnitY()) *
                        Eigen::AngleAxisd(r, Vec3::UnitX()))
                           .toRotationMatrix();
        const Vec3 rpy = rpy_from_matrix(m);
        const Mat3 back = (Eigen::AngleAxisd(rpy.z(), Vec3::UnitZ()) * Eigen::AngleAxisd(rpy.y(), Vec3::UnitY()) *
                           Eigen::AngleAxisd(rpy.x(), Vec3::UnitX()))
                              .toRotationMatrix();
        EXPECT_TRUE(back.isApprox(m, 1e-12));
      }
    }
  }
}

TEST(Export, UrdfUsesMetres) {
  const HandModel h = assemble_hand(default_design());
  const std::string xml = urdf_xml(h);
  EXPECT_NE(xml.find("scale=\"0.001 0.001 0.001\""), std::string::npos);
  EXPECT_NE(xml.find("effort=\"2\" velocity=\"5\""), std::string::npos);
}
