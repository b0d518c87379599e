#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "handco/forest.h"

namespace handco {

struct ShapExplanation {
  double base_value = 0.0;
  std::vector<double> phi;
  double prediction = 0.0;
};

/// Cover-weighted mean of the leaf values.
double expected_value(const RegressionTree& tree);

/// Path-dependent TreeSHAP for one tree.
ShapExplanation tree_shap(const RegressionTree& tree, std::span<const double> x, int n_features);

/// Per-tree explanations averaged over the forest.
ShapExplanation shap_values(const RegressionForest& forest, std::span<const double> x);

/// Explanations for every row of the dataset, parallel over rows.
std::vector<ShapExplanation> explain_rows(const RegressionForest& forest, const Dataset& data, int jobs = 1);

struct GroupImportance {
  std::string group;
  double importance = 0.0;  // mean over rows of sum_{j in group} |phi_j|
};

struct FeatureImportance {
  std::string name;
  std::string group;
  double mean_abs_phi = 0.0;
  double correlation = 0.0;  // Pearson(value, phi) over rows where active; NaN if undefined
  double inactive_fraction = 0.0;
};

struct ImportanceTable {
  std::vector<GroupImportance> groups;      // descending
  std::vector<FeatureImportance> features;  // descending by mean |phi|
};

/// Throws std::invalid_argument when a column carries a tag that is not in
/// data.groups, or when the explanations do not match the dataset.
ImportanceTable group_importance(std::span<const ShapExplanation> explanations, const Dataset& data);

/// report/shap.csv: trial, phi_<column>..., base, prediction.
void write_shap_csv(const std::filesystem::path& path, std::span<const ShapExplanation> explanations,
                    const Dataset& data);
/// report/importance.csv: kind, rank, name, group, importance, correlation, inactive_fraction.
void write_importance_csv(const std::filesystem::path& path, const ImportanceTable& table);
/// report/shap_long.csv: trial, feature, group, value, phi (one row per cell).
void write_shap_long_csv(const std::filesystem::path& path, std::span<const ShapExplanation> explanations,
                         const Dataset& data);

}  // namespace handco
