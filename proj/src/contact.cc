#include "handco/contact.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace handco {
namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

struct BodySamples {
  std::string name;
  const std::vector<Vec3>* points;
  Vec3 center;
  double radius;
};

BodySamples samples_of(const std::string& name, const TriMesh& mesh) {
  const Aabb box = bounding_box(mesh);
  const Vec3 c = (box.lo + box.hi) / 2.0;
  double r = 0.0;
  for (const auto& v : mesh.vertices) r = std::max(r, (v - c).norm());
  return {name, &mesh.vertices, c, r};
}

struct Probe {
  double distance = std::numeric_limits<double>::infinity();
  Vec3 witness = Vec3::Zero();
};

// Minimum tool SDF over the body's sample points. When `cull` is finite and
// the bounding sphere is farther than `cull`, returns the sphere lower bound.
Probe probe(const BodySamples& b, const Pose& pose, const ToolModel& tool, double cull) {
  Probe out;
  const Vec3 c = pose * b.center;
  if (std::isfinite(cull)) {
    const double lower = tool.sdf(c) - b.radius;
    if (lower > cull) {
      out.distance = lower;
      out.witness = c;
      return out;
    }
  }
  for (const auto& v : *b.points) {
    const Vec3 p = pose * v;
    const double d = tool.sdf(p);
    if (d < out.distance) {
      out.distance = d;
      out.witness = p;
    }
  }
  return out;
}

std::vector<Pose> chain_poses(const FingerChain& chain, const Pose& t_grasp, const std::vector<double>& q_deg) {
  std::vector<double> q(q_deg.size());
  for (std::size_t i = 0; i < q.size(); ++i) q[i] = q_deg[i] * kDeg;
  auto poses = forward_kinematics(chain, q);
  for (auto& p : poses) p = t_grasp * p;
  return poses;
}

}  // namespace

std::vector<int> closing_joints(const FingerChain& chain) {
  std::vector<int> out;
  const int first_group = chain.is_thumb ? chain.mode_joints : 0;
  for (int i = first_group; i < static_cast<int>(chain.joints.size()); ++i) {
    if (chain.is_thumb || chain.joints[i].type == JointType::Grasp) out.push_back(i);
  }
  return out;
}

int base_side_joint(const FingerChain& chain) {
  for (int i = 0; i < chain.mode_joints; ++i) {
    if (chain.joints[i].type == JointType::Side) return i;
  }
  return -1;
}

std::vector<std::vector<double>> preshape(const HandModel& hand, const std::vector<double>& spread) {
  std::vector<std::vector<double>> q;
  for (std::size_t c = 0; c < hand.chains.size(); ++c) {
    const auto& chain = hand.chains[c];
    std::vector<double> qc(chain.dof(), 0.0);
    const int side = base_side_joint(chain);
    if (side >= 0 && c < spread.size()) {
      qc[side] = std::clamp(spread[c], chain.joints[side].lo_deg, chain.joints[side].hi_deg);
    }
    if (chain.is_thumb && chain.mode_joints == 2) qc[1] = 90.0;
    q.push_back(std::move(qc));
  }
  return q;
}

std::vector<BodyDistance> hand_distances(const HandModel& hand, const ToolModel& tool, const Pose& t_grasp,
                                         const std::vector<std::vector<double>>& q_deg) {
  std::vector<BodyDistance> out;
  const auto inf = std::numeric_limits<double>::infinity();
  const Probe palm = probe(samples_of("palm", hand.palm.mesh), t_grasp, tool, inf);
  out.push_back({"palm", palm.distance, palm.witness, t_grasp.linear().col(0)});
  for (std::size_t c = 0; c < hand.chains.size(); ++c) {
    const auto& chain = hand.chains[c];
    const auto poses = chain_poses(chain, t_grasp, q_deg.at(c));
    for (std::size_t l = 0; l < chain.links.size(); ++l) {
      const Probe p = probe(samples_of(chain.links[l].name, chain.links[l].mesh), poses[l], tool, inf);
      out.push_back({chain.links[l].name, p.distance, p.witness, poses[l].linear().col(0)});
    }
  }
  return out;
}

ContactSet close_fingers(const HandModel& hand, const ToolModel& tool, const GraspConfig& g,
                         const ClosingOptions& opts) {
  ContactSet result;
  std::vector<std::vector<double>> q = g.q0.empty() ? preshape(hand, g.spread) : g.q0;
  result.q = q;
  if (!hand.feasible) {
    result.feasible = false;
    return result;
  }

  // Penetration at the preshape makes the grasp infeasible.
  for (const auto& d : hand_distances(hand, tool, g.t_grasp, q)) {
    if (d.distance < 0.0) {
      result.feasible = false;
      return result;
    }
  }

  const double tol = opts.tolerance;
  for (std::size_t c = 0; c < hand.chains.size(); ++c) {
    const auto& chain = hand.chains[c];
    std::vector<BodySamples> bodies;
    for (const auto& l : chain.links) bodies.push_back(samples_of(l.name, l.mesh));
    const auto joints = closing_joints(chain);
    std::vector<double>& qc = q[c];
    std::vector<bool> stopped(chain.dof(), true);
    for (int j : joints) stopped[j] = qc[j] >= chain.joints[j].hi_deg;

    auto distances = [&](const std::vector<double>& qq, std::size_t from) {
      const auto poses = chain_poses(chain, g.t_grasp, qq);
      std::vector<double> d(chain.links.size(), std::numeric_limits<double>::infinity());
      for (std::size_t l = from; l < chain.links.size(); ++l) d[l] = probe(bodies[l], poses[l], tool, tol).distance;
      return d;
    };
    auto stop_touching = [&](const std::vector<double>& d) {
      for (int j : joints) {
        for (std::size_t l = j; l < d.size(); ++l) {
          if (d[l] <= tol) stopped[j] = true;
        }
      }
    };
    stop_touching(distances(qc, 0));

    // Chains do not interact, so stepping them one after another is the same
    // as stepping them synchronously.
    while (true) {
      std::vector<int> moving;
      for (int j : joints) {
        if (!stopped[j]) moving.push_back(j);
      }
      if (moving.empty()) break;
      const std::size_t first = static_cast<std::size_t>(moving.front());
      std::vector<double> target = qc;
      for (int j : moving) target[j] = std::min(qc[j] + opts.step_deg, chain.joints[j].hi_deg);
      auto d = distances(target, first);
      const auto penetrating = [&](const std::vector<double>& dd) {
        return *std::min_element(dd.begin() + static_cast<std::ptrdiff_t>(first), dd.end()) < 0.0;
      };
      if (penetrating(d)) {
        double lo = 0.0, hi = 1.0;
        for (int it = 0; it < 12; ++it) {
          const double mid = 0.5 * (lo + hi);
          std::vector<double> qm = qc;
          for (int j : moving) qm[j] = qc[j] + mid * (target[j] - qc[j]);
          (penetrating(distances(qm, first)) ? hi : lo) = mid;
        }
        for (int j : moving) qc[j] += lo * (target[j] - qc[j]);
        // Whatever blocked the step stops every moving joint proximal to it.
        for (std::size_t l = first; l < d.size(); ++l) {
          if (d[l] < 0.0) {
            for (int j : moving) {
              if (static_cast<std::size_t>(j) <= l) stopped[j] = true;
            }
          }
        }
        d = distances(qc, first);
      } else {
        qc = target;
      }
      for (int j : moving) {
        if (qc[j] >= chain.joints[j].hi_deg - 1e-9) stopped[j] = true;
      }
      stop_touching(d);
    }
  }
  result.q = q;

  for (const auto& b : hand_distances(hand, tool, g.t_grasp, q)) {
    if (b.distance > tol) continue;
    Contact c;
    const Vec3 n_out = tool.normal(b.witness);
    c.point = b.witness - b.distance * n_out;
    c.normal = -tool.normal(c.point);
    c.mu = opts.mu;
    c.cap = opts.cap;
    c.link = b.link;
    c.distance = b.distance;
    const Vec3 t = b.axis - b.axis.dot(c.normal) * c.normal;
    if (t.norm() > 1e-6) c.tangent = t.normalized();
    result.contacts.push_back(c);
  }
  return result;
}

}  // namespace handco
