#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "handco/contact.h"

namespace handco {

using Wrench = Eigen::Matrix<double, 6, 1>;

struct WrenchTestSpec {
  double f_max = 20.0;        // N
  double tau_max = 0.6;       // N m
  double t_max = 1.0;         // s; only the ramp ratio matters here
  double delta_p = 5.0;       // mm; kept for configuration parity, unused
  double delta_theta = 10.0;  // deg; kept for configuration parity, unused
  int cone_edges = 8;
  double torque_scale = 100.0;  // mm
  bool gravity = false;
  double object_mass = 0.0;  // kg, used only with gravity
};

inline constexpr int kTestDirections = 12;

/// Direction i: 0..5 = +fx, -fx, +fy, -fy, +fz, -fz; 6..11 the same for
/// torque (nondimensionalized by the torque scale).
Wrench test_direction(int i);

/// Largest disturbance magnitude along this direction in N (torques in
/// N mm / torque_scale) for the direction limit.
double direction_limit(int i, const WrenchTestSpec& spec);

/// Unit friction-cone edges n + mu (cos t1 + sin t2) for one contact.
std::vector<Vec3> cone_edges(const Contact& c, int m);

/// 6 x (n_contacts * m) grasp map over cone edges; torque rows use p / rho.
Eigen::MatrixXd grasp_map(const std::vector<Contact>& contacts, const WrenchTestSpec& spec);

/// max alpha s.t. sum_c [f_c; (p_c / rho) x f_c] = -alpha w_hat, each f_c a
/// nonnegative combination of its cone edges with normal part <= cap.
double resist_magnitude(const std::vector<Contact>& contacts, const Wrench& w_hat,
                        const WrenchTestSpec& spec);

struct StabilityScore {
  std::array<double, kTestDirections> per_direction{};
  double s_t = 0.0;
};

StabilityScore grasp_score(const std::vector<Contact>& contacts, const WrenchTestSpec& spec);

/// Mean of the K best scores of every tool. Throws std::invalid_argument
/// naming a tool with fewer than K scores.
double hand_score(const std::map<std::string, std::vector<double>>& per_tool, int k);

}  // namespace handco
