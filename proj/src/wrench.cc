#include "handco/wrench.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>

#include "handco/simplex.h"

namespace handco {

Wrench test_direction(int i) {
  if (i < 0 || i >= kTestDirections) throw std::out_of_range("test direction index");
  Wrench w = Wrench::Zero();
  w(i / 2) = (i % 2 == 0) ? 1.0 : -1.0;
  return w;
}

double direction_limit(int i, const WrenchTestSpec& spec) {
  return i < 6 ? spec.f_max : spec.tau_max * 1000.0 / spec.torque_scale;
}

std::vector<Vec3> cone_edges(const Contact& c, int m) {
  const Vec3 n = c.normal.normalized();
  Vec3 t1;
  if (c.tangent) {
    t1 = (*c.tangent - c.tangent->dot(n) * n).normalized();
  } else {
    Vec3 e = Vec3::UnitX();
    if (std::abs(n.x()) > std::abs(n.y())) e = Vec3::UnitY();
    if (std::abs(e.dot(n)) > std::abs(Vec3::UnitZ().dot(n))) e = Vec3::UnitZ();
    t1 = n.cross(e).normalized();
  }
  const Vec3 t2 = n.cross(t1);
  std::vector<Vec3> edges;
  edges.reserve(m);
  for (int k = 0; k < m; ++k) {
    const double th = 2.0 * std::numbers::pi * k / m;
    edges.push_back(n + c.mu * (std::cos(th) * t1 + std::sin(th) * t2));
  }
  return edges;
}

Eigen::MatrixXd grasp_map(const std::vector<Contact>& contacts, const WrenchTestSpec& spec) {
  const int m = spec.cone_edges;
  Eigen::MatrixXd g(6, static_cast<Eigen::Index>(contacts.size()) * m);
  for (std::size_t c = 0; c < contacts.size(); ++c) {
    const Vec3 r = contacts[c].point / spec.torque_scale;
    const auto edges = cone_edges(contacts[c], m);
    for (int e = 0; e < m; ++e) {
      const Eigen::Index col = static_cast<Eigen::Index>(c) * m + e;
      g.block<3, 1>(0, col) = edges[e];
      g.block<3, 1>(3, col) = r.cross(edges[e]);
    }
  }
  return g;
}

double resist_magnitude(const std::vector<Contact>& contacts, const Wrench& w_hat,
                        const WrenchTestSpec& spec) {
  if (contacts.empty()) return 0.0;
  if (spec.cone_edges < 3) throw std::invalid_argument("cone_edges must be >= 3");
  const int m = spec.cone_edges;
  const Eigen::Index nb = static_cast<Eigen::Index>(contacts.size()) * m;
  const Eigen::Index n = nb + 1;  // cone coefficients then alpha

  Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
  c(nb) = 1.0;
  Eigen::MatrixXd a_eq(6, n);
  a_eq.leftCols(nb) = grasp_map(contacts, spec);
  a_eq.col(nb) = w_hat;
  Eigen::VectorXd b_eq = Eigen::VectorXd::Zero(6);
  if (spec.gravity) b_eq(2) = spec.object_mass * 9.81;  // balances the weight m g (-z)

  Eigen::MatrixXd a_ub = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(contacts.size()), n);
  Eigen::VectorXd b_ub(static_cast<Eigen::Index>(contacts.size()));
  for (std::size_t k = 0; k < contacts.size(); ++k) {
    a_ub.block(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k) * m, 1, m).setOnes();
    b_ub(static_cast<Eigen::Index>(k)) = contacts[k].cap;
  }
  const LpResult r = solve_lp(c, a_ub, b_ub, a_eq, b_eq);
  if (r.status != LpStatus::kOptimal) return 0.0;
  return std::max(0.0, r.objective);
}

StabilityScore grasp_score(const std::vector<Contact>& contacts, const WrenchTestSpec& spec) {
  StabilityScore s;
  double sum = 0.0;
  for (int i = 0; i < kTestDirections; ++i) {
    const double alpha = resist_magnitude(contacts, test_direction(i), spec);
    s.per_direction[i] = std::clamp(alpha / direction_limit(i, spec), 0.0, 1.0);
    sum += s.per_direction[i];
  }
  s.s_t = sum / kTestDirections;
  return s;
}

double hand_score(const std::map<std::string, std::vector<double>>& per_tool, int k) {
  if (k < 1) throw std::invalid_argument("hand_score: K must be >= 1");
  if (per_tool.empty()) throw std::invalid_argument("hand_score: no tools");
  double sum = 0.0;
  for (const auto& [tool, scores] : per_tool) {
    if (scores.size() < static_cast<std::size_t>(k)) {
      throw std::invalid_argument("hand_score: tool '" + tool + "' has " + std::to_string(scores.size()) +
                                  " grasps, fewer than K = " + std::to_string(k));
    }
    std::vector<double> sorted = scores;
    std::partial_sort(sorted.begin(), sorted.begin() + k, sorted.end(), std::greater<>());
    for (int i = 0; i < k; ++i) sum += sorted[i];
  }
  return sum / (static_cast<double>(k) * static_cast<double>(per_tool.size()));
}

}  // namespace handco
