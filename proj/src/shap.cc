#include "handco/shap.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <thread>

namespace handco {
namespace {

struct PathElement {
  int feature = -1;
  double zero_fraction = 0.0;
  double one_fraction = 0.0;
  double weight = 0.0;
};

using Path = std::vector<PathElement>;

void extend_path(Path& path, int depth, double zero_fraction, double one_fraction, int feature) {
  path.resize(static_cast<std::size_t>(depth) + 1);
  path[depth] = {feature, zero_fraction, one_fraction, depth == 0 ? 1.0 : 0.0};
  for (int i = depth - 1; i >= 0; --i) {
    path[i + 1].weight += one_fraction * path[i].weight * (i + 1) / (depth + 1.0);
    path[i].weight = zero_fraction * path[i].weight * (depth - i) / (depth + 1.0);
  }
}

void unwind_path(Path& path, int depth, int index) {
  const double one = path[index].one_fraction;
  const double zero = path[index].zero_fraction;
  double next = path[depth].weight;
  for (int i = depth - 1; i >= 0; --i) {
    if (one != 0.0) {
      const double tmp = path[i].weight;
      path[i].weight = next * (depth + 1.0) / ((i + 1.0) * one);
      next = tmp - path[i].weight * zero * (depth - i) / (depth + 1.0);
    } else {
      path[i].weight = path[i].weight * (depth + 1.0) / (zero * (depth - i));
    }
  }
  for (int i = index; i < depth; ++i) {
    path[i].feature = path[i + 1].feature;
    path[i].zero_fraction = path[i + 1].zero_fraction;
    path[i].one_fraction = path[i + 1].one_fraction;
  }
  path.resize(static_cast<std::size_t>(depth));
}

// Total weight of the path with element `index` removed.
double unwound_sum(const Path& path, int depth, int index) {
  const double one = path[index].one_fraction;
  const double zero = path[index].zero_fraction;
  double next = path[depth].weight;
  double total = 0.0;
  for (int i = depth - 1; i >= 0; --i) {
    if (one != 0.0) {
      const double tmp = next * (depth + 1.0) / ((i + 1.0) * one);
      total += tmp;
      next = path[i].weight - tmp * zero * (depth - i) / (depth + 1.0);
    } else {
      total += path[i].weight / zero / ((depth - i) / (depth + 1.0));
    }
  }
  return total;
}

void recurse(const RegressionTree& tree, int node, std::span<const double> x, std::vector<double>& phi,
             Path path, int depth, double zero_fraction, double one_fraction, int feature) {
  extend_path(path, depth, zero_fraction, one_fraction, feature);
  const TreeNode& n = tree.nodes[node];
  if (n.is_leaf()) {
    for (int i = 1; i <= depth; ++i) {
      const double w = unwound_sum(path, depth, i);
      phi[path[i].feature] += w * (path[i].one_fraction - path[i].zero_fraction) * n.value;
    }
    return;
  }
  const bool left = goes_left(x[n.feature], n.threshold);
  const int hot = left ? n.left : n.right;
  const int cold = left ? n.right : n.left;

  double incoming_zero = 1.0, incoming_one = 1.0;
  for (int k = 1; k <= depth; ++k) {
    if (path[k].feature == n.feature) {
      incoming_zero = path[k].zero_fraction;
      incoming_one = path[k].one_fraction;
      unwind_path(path, depth, k);
      --depth;
      break;
    }
  }
  const double hot_zero = tree.nodes[hot].count / n.count;
  const double cold_zero = tree.nodes[cold].count / n.count;
  recurse(tree, hot, x, phi, path, depth + 1, hot_zero * incoming_zero, incoming_one, n.feature);
  recurse(tree, cold, x, phi, path, depth + 1, cold_zero * incoming_zero, 0.0, n.feature);
}

double subtree_expectation(const RegressionTree& tree, int node) {
  const TreeNode& n = tree.nodes[node];
  if (n.is_leaf()) return n.value;
  return (tree.nodes[n.left].count * subtree_expectation(tree, n.left) +
          tree.nodes[n.right].count * subtree_expectation(tree, n.right)) /
         n.count;
}

std::string csv_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::ofstream open_csv(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void check_explanations(std::span<const ShapExplanation> explanations, const Dataset& data) {
  data.check();
  if (static_cast<Eigen::Index>(explanations.size()) != data.rows()) {
    throw std::invalid_argument("explanations and dataset rows differ");
  }
  for (const auto& e : explanations) {
    if (static_cast<Eigen::Index>(e.phi.size()) != data.cols()) {
      throw std::invalid_argument("explanation width does not match the dataset");
    }
  }
}

}  // namespace

double expected_value(const RegressionTree& tree) { return subtree_expectation(tree, 0); }

ShapExplanation tree_shap(const RegressionTree& tree, std::span<const double> x, int n_features) {
  ShapExplanation e;
  e.phi.assign(static_cast<std::size_t>(n_features), 0.0);
  e.base_value = expected_value(tree);
  e.prediction = tree.predict(x);
  recurse(tree, 0, x, e.phi, {}, 0, 1.0, 1.0, -1);
  return e;
}

ShapExplanation shap_values(const RegressionForest& forest, std::span<const double> x) {
  if (static_cast<int>(x.size()) != forest.n_features) {
    throw std::invalid_argument("shap_values: feature count mismatch");
  }
  ShapExplanation out;
  out.phi.assign(static_cast<std::size_t>(forest.n_features), 0.0);
  for (const auto& t : forest.trees) {
    const ShapExplanation e = tree_shap(t, x, forest.n_features);
    out.base_value += e.base_value;
    out.prediction += e.prediction;
    for (std::size_t j = 0; j < out.phi.size(); ++j) out.phi[j] += e.phi[j];
  }
  const double n = static_cast<double>(forest.trees.size());
  out.base_value /= n;
  out.prediction /= n;
  for (double& p : out.phi) p /= n;
  return out;
}

std::vector<ShapExplanation> explain_rows(const RegressionForest& forest, const Dataset& data, int jobs) {
  data.check();
  std::vector<ShapExplanation> out(static_cast<std::size_t>(data.rows()));
  auto one = [&](Eigen::Index r) {
    std::vector<double> x(data.X.row(r).begin(), data.X.row(r).end());
    out[static_cast<std::size_t>(r)] = shap_values(forest, x);
  };
  const auto workers = static_cast<Eigen::Index>(std::max(1, jobs));
  if (workers == 1) {
    for (Eigen::Index r = 0; r < data.rows(); ++r) one(r);
    return out;
  }
  std::vector<std::thread> pool;
  for (Eigen::Index w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (Eigen::Index r = w; r < data.rows(); r += workers) one(r);
    });
  }
  for (auto& t : pool) t.join();
  return out;
}

ImportanceTable group_importance(std::span<const ShapExplanation> explanations, const Dataset& data) {
  check_explanations(explanations, data);
  for (const auto& tag : data.column_groups) {
    if (std::find(data.groups.begin(), data.groups.end(), tag) == data.groups.end()) {
      throw std::invalid_argument("unknown group tag '" + tag + "'");
    }
  }
  const double n = static_cast<double>(std::max<std::size_t>(explanations.size(), 1));
  ImportanceTable table;
  for (const auto& g : data.groups) table.groups.push_back({g, 0.0});

  for (Eigen::Index j = 0; j < data.cols(); ++j) {
    FeatureImportance f;
    f.name = data.columns[j];
    f.group = data.column_groups[j];
    double sx = 0, sp = 0, sxx = 0, spp = 0, sxp = 0;
    int active = 0;
    for (Eigen::Index r = 0; r < data.rows(); ++r) {
      const double p = explanations[r].phi[j];
      f.mean_abs_phi += std::abs(p);
      const double v = data.X(r, j);
      if (is_missing(v)) continue;
      ++active;
      sx += v;
      sp += p;
      sxx += v * v;
      spp += p * p;
      sxp += v * p;
    }
    f.mean_abs_phi /= n;
    f.inactive_fraction = data.rows() > 0 ? 1.0 - active / static_cast<double>(data.rows()) : 0.0;
    f.correlation = std::numeric_limits<double>::quiet_NaN();
    if (active >= 2) {
      const double cov = sxp - sx * sp / active;
      const double vx = sxx - sx * sx / active;
      const double vp = spp - sp * sp / active;
      if (vx > 0 && vp > 0) f.correlation = std::clamp(cov / std::sqrt(vx * vp), -1.0, 1.0);
    }
    for (auto& g : table.groups) {
      if (g.group == f.group) g.importance += f.mean_abs_phi;
    }
    table.features.push_back(f);
  }
  std::stable_sort(table.groups.begin(), table.groups.end(),
                   [](const auto& a, const auto& b) { return a.importance > b.importance; });
  std::stable_sort(table.features.begin(), table.features.end(),
                   [](const auto& a, const auto& b) { return a.mean_abs_phi > b.mean_abs_phi; });
  return table;
}

void write_shap_csv(const std::filesystem::path& path, std::span<const ShapExplanation> explanations,
                    const Dataset& data) {
  check_explanations(explanations, data);
  auto out = open_csv(path);
  out << "trial";
  for (const auto& c : data.columns) out << ",phi_" << c;
  out << ",base,prediction\n";
  for (std::size_t r = 0; r < explanations.size(); ++r) {
    out << r;
    for (double p : explanations[r].phi) out << ',' << csv_number(p);
    out << ',' << csv_number(explanations[r].base_value) << ',' << csv_number(explanations[r].prediction) << '\n';
  }
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

void write_importance_csv(const std::filesystem::path& path, const ImportanceTable& table) {
  auto out = open_csv(path);
  out << "kind,rank,name,group,importance,correlation,inactive_fraction\n";
  for (std::size_t i = 0; i < table.groups.size(); ++i) {
    const auto& g = table.groups[i];
    out << "group," << i + 1 << ',' << g.group << ',' << g.group << ',' << csv_number(g.importance) << ",,\n";
  }
  for (std::size_t i = 0; i < table.features.size(); ++i) {
    const auto& f = table.features[i];
    out << "feature," << i + 1 << ',' << f.name << ',' << f.group << ',' << csv_number(f.mean_abs_phi) << ','
        << csv_number(f.correlation) << ',' << csv_number(f.inactive_fraction) << '\n';
  }
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

void write_shap_long_csv(const std::filesystem::path& path, std::span<const ShapExplanation> explanations,
                         const Dataset& data) {
  check_explanations(explanations, data);
  auto out = open_csv(path);
  out << "trial,feature,group,value,phi\n";
  for (std::size_t r = 0; r < explanations.size(); ++r) {
    for (Eigen::Index j = 0; j < data.cols(); ++j) {
      out << r << ',' << data.columns[j] << ',' << data.column_groups[j] << ','
          << csv_number(data.X(static_cast<Eigen::Index>(r), j)) << ',' << csv_number(explanations[r].phi[j])
          << '\n';
    }
  }
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace handco
