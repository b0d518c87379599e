#include "handco/simplex.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace handco {
namespace {

class Tableau {
 public:
  Tableau(int rows, int cols) : t_(Eigen::MatrixXd::Zero(rows + 1, cols + 1)), basis_(rows, -1) {}

  double& at(int r, int c) { return t_(r, c); }
  double rhs(int r) const { return t_(r, t_.cols() - 1); }
  int rows() const { return static_cast<int>(basis_.size()); }
  int cols() const { return static_cast<int>(t_.cols()) - 1; }
  int obj_row() const { return rows(); }
  std::vector<int>& basis() { return basis_; }

  void pivot(int r, int c) {
    t_.row(r) /= t_(r, c);
    for (int i = 0; i <= rows(); ++i) {
      if (i == r) continue;
      const double f = t_(i, c);
      if (f != 0.0) t_.row(i) -= f * t_.row(r);
    }
    basis_[r] = c;
  }

  // Bland's rule on columns [0, allowed). Returns false on unboundedness.
  bool optimize(int allowed, double tol, int& iterations, int max_iterations) {
    while (true) {
      int enter = -1;
      for (int c = 0; c < allowed; ++c) {
        if (t_(obj_row(), c) < -tol) {
          enter = c;
          break;
        }
      }
      if (enter < 0) return true;
      int leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (int r = 0; r < rows(); ++r) {
        const double a = t_(r, enter);
        if (a <= tol) continue;
        const double ratio = rhs(r) / a;
        if (ratio < best - tol || (ratio <= best + tol && leave >= 0 && basis_[r] < basis_[leave])) {
          if (ratio < best) best = ratio;
          leave = r;
        }
      }
      if (leave < 0) return false;
      pivot(leave, enter);
      if (++iterations > max_iterations) throw std::runtime_error("simplex iteration limit");
    }
  }

  Eigen::MatrixXd t_;

 private:
  std::vector<int> basis_;
};

}  // namespace

LpResult solve_lp(const Eigen::VectorXd& c, const Eigen::MatrixXd& a_ub, const Eigen::VectorXd& b_ub,
                  const Eigen::MatrixXd& a_eq, const Eigen::VectorXd& b_eq, double tol) {
  const int n = static_cast<int>(c.size());
  const int m_ub = static_cast<int>(b_ub.size());
  const int m_eq = static_cast<int>(b_eq.size());
  if ((m_ub > 0 && a_ub.cols() != n) || a_ub.rows() != m_ub || (m_eq > 0 && a_eq.cols() != n) ||
      a_eq.rows() != m_eq) {
    throw std::invalid_argument("solve_lp: dimension mismatch");
  }
  const int m = m_ub + m_eq;

  // Rows needing an artificial: equalities, and inequalities with b < 0.
  std::vector<bool> needs_art(m, false);
  int n_art = 0;
  for (int i = 0; i < m; ++i) {
    needs_art[i] = i >= m_ub || b_ub(i) < 0;
    n_art += needs_art[i];
  }
  const int slack0 = n, art0 = n + m_ub, cols = n + m_ub + n_art;
  Tableau tab(m, cols);
  int art = art0;
  for (int i = 0; i < m; ++i) {
    const bool ub = i < m_ub;
    const double b = ub ? b_ub(i) : b_eq(i - m_ub);
    const double sign = b < 0 ? -1.0 : 1.0;
    for (int j = 0; j < n; ++j) tab.at(i, j) = sign * (ub ? a_ub(i, j) : a_eq(i - m_ub, j));
    if (ub) tab.at(i, slack0 + i) = sign;
    tab.at(i, cols) = sign * b;
    if (needs_art[i]) {
      tab.at(i, art) = 1.0;
      tab.basis()[i] = art++;
    } else {
      tab.basis()[i] = slack0 + i;
    }
  }

  int iterations = 0;
  const int max_iterations = 50000;
  LpResult res;
  if (n_art > 0) {
    // Phase 1: maximize -sum(artificials).
    for (int j = art0; j < cols; ++j) tab.at(m, j) = 1.0;
    for (int i = 0; i < m; ++i) {
      if (needs_art[i]) tab.t_.row(m) -= tab.t_.row(i);
    }
    tab.optimize(cols, tol, iterations, max_iterations);
    double scale = 1.0;
    for (int i = 0; i < m; ++i) scale = std::max(scale, std::abs(tab.rhs(i)));
    if (tab.at(m, cols) < -1e-8 * scale) {  // max of -sum(artificials) is below zero
      res.status = LpStatus::kInfeasible;
      return res;
    }
    // Drive zero-valued artificials out of the basis where possible; rows
    // with no usable column are redundant and stay inert.
    for (int i = 0; i < m; ++i) {
      if (tab.basis()[i] < art0) continue;
      for (int j = 0; j < art0; ++j) {
        if (std::abs(tab.at(i, j)) > 1e-9) {
          tab.pivot(i, j);
          break;
        }
      }
    }
  }

  // Phase 2.
  tab.t_.row(m).setZero();
  for (int j = 0; j < n; ++j) tab.at(m, j) = -c(j);
  for (int i = 0; i < m; ++i) {
    const int b = tab.basis()[i];
    const double f = tab.at(m, b);
    if (f != 0.0) tab.t_.row(m) -= f * tab.t_.row(i);
  }
  if (!tab.optimize(art0, tol, iterations, max_iterations)) {
    res.status = LpStatus::kUnbounded;
    return res;
  }
  res.status = LpStatus::kOptimal;
  res.x = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < m; ++i) {
    if (tab.basis()[i] < n) res.x(tab.basis()[i]) = tab.rhs(i);
  }
  res.objective = c.dot(res.x);
  return res;
}

}  // namespace handco
