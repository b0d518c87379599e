#include "handco/finger.h"

#include <cmath>
#include <numbers>

#include "handco/errors.h"

namespace handco {
namespace {

constexpr double kCornerRadius = 3.0;
constexpr int kCornerSegments = 5;  // 6 points per corner, 24 per ring
constexpr double kRingSpacing = 4.0;
constexpr int kCapRings = 5;

// Rounded rectangle in the (y, z) plane, counter-clockwise seen from +x.
std::vector<Vec2> cross_section() {
  const double a = kLinkWidth / 2.0 - kCornerRadius;
  const double b = kLinkHeight / 2.0 - kCornerRadius;
  const std::array<Vec2, 4> centers = {Vec2(a, -b), Vec2(a, b), Vec2(-a, b), Vec2(-a, -b)};
  std::vector<Vec2> pts;
  for (int c = 0; c < 4; ++c) {
    const double start = -std::numbers::pi / 2.0 + c * std::numbers::pi / 2.0;
    for (int k = 0; k <= kCornerSegments; ++k) {
      const double t = start + (std::numbers::pi / 2.0) * k / kCornerSegments;
      pts.push_back(centers[c] + kCornerRadius * Vec2(std::cos(t), std::sin(t)));
    }
  }
  return pts;
}

}  // namespace

std::string_view to_string(JointType t) {
  switch (t) {
    case JointType::Grasp: return "grasp";
    case JointType::Side: return "side";
    case JointType::Axial: return "axial";
  }
  return "?";
}

JointSpec joint_for(JointType t) {
  JointSpec j;
  j.type = t;
  switch (t) {
    case JointType::Grasp:
      j.axis = -Vec3::UnitY();
      j.lo_deg = 0.0;
      j.hi_deg = 110.0;
      break;
    case JointType::Side:
      j.axis = Vec3::UnitZ();
      j.lo_deg = -30.0;
      j.hi_deg = 30.0;
      break;
    case JointType::Axial:
      j.axis = Vec3::UnitX();
      j.lo_deg = -90.0;
      j.hi_deg = 90.0;
      break;
  }
  return j;
}

FingerCode parse_finger_code(std::string_view code, bool is_thumb) {
  auto fail = [&](const std::string& why) {
    return ConfigError("finger code '" + std::string(code) + "': " + why);
  };
  if (code.empty()) throw fail("empty code");
  FingerCode out;
  out.is_thumb = is_thumb;
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t dash = code.find('-', start);
    parts.emplace_back(code.substr(start, dash == std::string_view::npos ? dash : dash - start));
    if (dash == std::string_view::npos) break;
    start = dash + 1;
  }
  if (parts[0].size() != 1 || parts[0][0] < '0' || parts[0][0] > '9') {
    throw fail("mode must be a single digit");
  }
  out.mode = parts[0][0] - '0';
  const int max_mode = is_thumb ? 1 : 4;
  if (out.mode > max_mode) throw fail("mode out of range [0, " + std::to_string(max_mode) + "]");
  for (std::size_t i = 1; i < parts.size(); ++i) {
    if (parts[i].empty()) throw fail("empty joint group");
    for (char c : parts[i]) {
      if (c < '1' || c > '3') throw fail(std::string("joint digit '") + c + "' not in {1,2,3}");
    }
    out.groups.push_back(parts[i]);
  }
  return out;
}

std::vector<JointType> joint_types(const FingerCode& code) {
  using enum JointType;
  std::vector<JointType> types;
  if (code.is_thumb) {
    types.push_back(Side);
    if (code.mode == 1) types.push_back(Axial);
  } else {
    static const std::array<std::vector<JointType>, 5> kModes = {{
        {Grasp},
        {Side, Grasp},
        {Axial, Grasp},
        {Side, Axial},
        {Side, Axial, Grasp},
    }};
    types = kModes.at(code.mode);
  }
  for (const auto& g : code.groups) {
    for (char c : g) types.push_back(c == '1' ? Grasp : c == '2' ? Side : Axial);
  }
  return types;
}

FingerStructure expand_structure(const FingerCode& code, std::span<const double> added_lengths,
                                 const Vec3& tip_scale) {
  if (added_lengths.size() != kBaseLinkProfile.size()) {
    throw ConfigError("expand_structure: expected " + std::to_string(kBaseLinkProfile.size()) +
                      " added lengths");
  }
  if ((tip_scale.array() <= 0.0).any()) throw ConfigError("expand_structure: tip scale must be positive");
  FingerStructure s;
  s.is_thumb = code.is_thumb;
  s.tip_scale = tip_scale;
  s.mode_joints = static_cast<int>(joint_types(FingerCode{code.mode, {}, code.is_thumb}).size());
  const auto types = joint_types(code);
  if (types.size() > static_cast<std::size_t>(kMaxJoints)) {
    throw ConfigError("expand_structure: " + std::to_string(types.size()) + " joints exceeds " +
                      std::to_string(kMaxJoints));
  }
  for (std::size_t i = 0; i < types.size(); ++i) {
    JointSpec j = joint_for(types[i]);
    j.id = "j" + std::to_string(i);
    s.joints.push_back(j);
    const std::size_t slot = std::min<std::size_t>(i, kBaseLinkProfile.size() - 1);
    const double len = kBaseLinkProfile[slot] + added_lengths[slot];
    if (!(len > 0.0)) throw ConfigError("expand_structure: non-positive link length");
    s.link_lengths.push_back(len);
  }
  return s;
}

TriMesh link_mesh(double length, bool fingertip, const Vec3& tip_scale) {
  const auto section = cross_section();
  const int k = static_cast<int>(section.size());
  const double cap = fingertip ? std::min(kLinkHeight / 2.0, length / 2.0) : 0.0;
  const double straight = length - cap;

  TriMesh m;
  int rings = 0;
  auto add_ring = [&](double x, double s) {
    for (const auto& p : section) m.vertices.emplace_back(x, s * p.x(), s * p.y());
    ++rings;
  };
  const int n = std::max(1, static_cast<int>(std::ceil(straight / kRingSpacing)));
  for (int i = 0; i <= n; ++i) add_ring(straight * i / n, 1.0);
  if (fingertip) {
    for (int i = 1; i <= kCapRings; ++i) {
      const double phi = (std::numbers::pi / 2.0) * i / (kCapRings + 1);
      add_ring(straight + cap * std::sin(phi), std::cos(phi));
    }
  }
  for (int r = 0; r + 1 < rings; ++r) {
    for (int i = 0; i < k; ++i) {
      const int a = r * k + i, b = r * k + (i + 1) % k;
      const int c = a + k, d = b + k;
      m.triangles.push_back({a, b, d});
      m.triangles.push_back({a, d, c});
    }
  }
  // Proximal cap faces -x.
  for (int i = 1; i + 1 < k; ++i) m.triangles.push_back({0, i + 1, i});
  const int last = (rings - 1) * k;
  if (fingertip) {
    const int apex = static_cast<int>(m.vertices.size());
    m.vertices.emplace_back(length, 0.0, 0.0);
    for (int i = 0; i < k; ++i) m.triangles.push_back({last + i, last + (i + 1) % k, apex});
  } else {
    for (int i = 1; i + 1 < k; ++i) m.triangles.push_back({last, last + i, last + i + 1});
  }
  if (fingertip) m = scaled(m, tip_scale);
  return m;
}

FingerChain build_chain(const FingerStructure& s, const BaseFrame& base) {
  if (s.joints.size() != s.link_lengths.size() || s.joints.empty()) {
    throw ConfigError("build_chain: joints and link lengths disagree");
  }
  FingerChain chain;
  chain.digit = base.digit;
  chain.is_thumb = s.is_thumb;
  chain.mode_joints = s.mode_joints;
  chain.base = base.pose();
  chain.joints = s.joints;
  for (std::size_t i = 0; i < s.joints.size(); ++i) {
    chain.joints[i].id = base.digit + "_" + s.joints[i].id;
    LinkBody link;
    link.name = base.digit + "_link" + std::to_string(i);
    link.length = s.link_lengths[i];
    const bool tip = i + 1 == s.joints.size();
    link.mesh = link_mesh(link.length, tip, s.tip_scale);
    link.colliders.push_back(ConvexPiece{link.mesh});
    link.mass = mass_props(link.mesh);
    chain.links.push_back(std::move(link));
  }
  return chain;
}

std::vector<Pose> forward_kinematics(const FingerChain& chain, std::span<const double> q) {
  if (q.size() != chain.joints.size()) throw std::invalid_argument("forward_kinematics: wrong q size");
  std::vector<Pose> poses;
  poses.reserve(q.size());
  Pose t = chain.base;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (i > 0) t.translate(Vec3(chain.links[i - 1].length, 0.0, 0.0));
    t.rotate(Eigen::AngleAxisd(q[i], chain.joints[i].axis));
    poses.push_back(t);
  }
  return poses;
}

Vec3 tip_position(const FingerChain& chain, std::span<const Pose> link_poses) {
  return link_poses.back() * Vec3(chain.links.back().length, 0.0, 0.0);
}

}  // namespace handco
