#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "handco/tpe.h"

namespace handco {

/// Rows are trials, columns follow the design-space encoding order. Inactive
/// parameters hold kMissing.
struct Dataset {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  std::vector<std::string> columns;
  std::vector<std::string> column_groups;  // one tag per column
  std::vector<std::string> groups;         // declared group order

  Eigen::Index rows() const { return X.rows(); }
  Eigen::Index cols() const { return X.cols(); }
  /// Throws std::invalid_argument on shape mismatches.
  void check() const;
};

/// Every trial of the history, encoded with `space`.
Dataset dataset_from_trials(const DesignSpace& space, std::span<const TrialRecord> history);

struct ForestConfig {
  int n_trees = 200;
  int max_depth = -1;  // < 0: unbounded
  int min_leaf = 2;
  double max_features = 1.0 / 3.0;  // fraction of columns tried per split
  bool bootstrap = true;
};

struct TreeNode {
  int feature = -1;  // -1 for a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double count = 0.0;  // training samples reaching the node (bootstrap multiplicity)
  double value = 0.0;  // mean target of those samples
  bool is_leaf() const { return feature < 0; }
};

/// Missing values and values <= threshold go left.
struct RegressionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  double predict(std::span<const double> x) const;
  int leaf_for(std::span<const double> x) const;
};

struct RegressionForest {
  ForestConfig config;
  std::uint64_t seed = 0;
  int n_features = 0;
  std::vector<RegressionTree> trees;

  /// Mean of the tree outputs. Throws std::invalid_argument on a width
  /// mismatch.
  double predict(std::span<const double> x) const;
};

inline bool goes_left(double v, double threshold) { return is_missing(v) || v <= threshold; }

/// CART with variance-reduction splits. Deterministic given the seed for any
/// `jobs`.
RegressionForest fit_forest(const Dataset& data, const ForestConfig& config, std::uint64_t seed, int jobs = 1);

}  // namespace handco
