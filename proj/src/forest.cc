#include "handco/forest.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <thread>

namespace handco {
namespace {

struct Candidate {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

class TreeBuilder {
 public:
  TreeBuilder(const Dataset& data, const ForestConfig& cfg, std::mt19937_64& rng)
      : data_(data), cfg_(cfg), rng_(rng) {
    const int p = static_cast<int>(data.cols());
    mtry_ = std::clamp(static_cast<int>(cfg.max_features * p), 1, p);
    order_.resize(p);
    std::iota(order_.begin(), order_.end(), 0);
  }

  RegressionTree build(std::vector<Eigen::Index> rows) {
    RegressionTree tree;
    grow(tree, std::move(rows), 0);
    return tree;
  }

 private:
  int grow(RegressionTree& tree, std::vector<Eigen::Index> rows, int depth) {
    const int id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    double sum = 0.0;
    for (auto r : rows) sum += data_.y(r);
    const double n = static_cast<double>(rows.size());
    tree.nodes[id].count = n;
    tree.nodes[id].value = sum / n;

    const bool depth_left = cfg_.max_depth < 0 || depth < cfg_.max_depth;
    if (!depth_left || rows.size() < 2 * static_cast<std::size_t>(cfg_.min_leaf)) return id;

    const Candidate best = best_split(rows, sum);
    if (best.feature < 0) return id;

    std::vector<Eigen::Index> left, right;
    for (auto r : rows) (goes_left(data_.X(r, best.feature), best.threshold) ? left : right).push_back(r);
    rows.clear();
    rows.shrink_to_fit();
    tree.nodes[id].feature = best.feature;
    tree.nodes[id].threshold = best.threshold;
    const int l = grow(tree, std::move(left), depth + 1);
    const int r = grow(tree, std::move(right), depth + 1);
    tree.nodes[id].left = l;
    tree.nodes[id].right = r;
    return id;
  }

  Candidate best_split(const std::vector<Eigen::Index>& rows, double sum) {
    std::shuffle(order_.begin(), order_.end(), rng_);
    const double n = static_cast<double>(rows.size());
    double sse = 0.0;
    for (auto r : rows) sse += std::pow(data_.y(r) - sum / n, 2);
    const double min_gain = 1e-12 * std::max(1.0, sse);

    Candidate best;
    int tried = 0;
    for (int f : order_) {
      if (tried >= mtry_ && best.feature >= 0) break;
      ++tried;
      scan_feature(f, rows, sum, min_gain, best);
    }
    return best;
  }

  // Left side = missing rows plus the sorted prefix.
  void scan_feature(int f, const std::vector<Eigen::Index>& rows, double sum, double min_gain,
                    Candidate& best) {
    const auto min_leaf = static_cast<std::size_t>(cfg_.min_leaf);
    vals_.clear();
    double miss_sum = 0.0;
    std::size_t miss_n = 0;
    for (auto r : rows) {
      const double v = data_.X(r, f);
      if (is_missing(v)) {
        miss_sum += data_.y(r);
        ++miss_n;
      } else {
        vals_.emplace_back(v, data_.y(r));
      }
    }
    if (vals_.empty()) return;
    std::sort(vals_.begin(), vals_.end());
    const double n = static_cast<double>(rows.size());
    const double parent = sum * sum / n;

    auto consider = [&](std::size_t n_left, double s_left, double threshold) {
      const std::size_t n_right = rows.size() - n_left;
      if (n_left < min_leaf || n_right < min_leaf) return;
      const double s_right = sum - s_left;
      const double gain = s_left * s_left / static_cast<double>(n_left) +
                          s_right * s_right / static_cast<double>(n_right) - parent;
      if (gain > min_gain && gain > best.gain) best = {f, threshold, gain};
    };

    if (miss_n > 0) {
      consider(miss_n, miss_sum, std::nextafter(vals_.front().first, -std::numeric_limits<double>::infinity()));
    }
    double s_left = miss_sum;
    for (std::size_t k = 0; k + 1 < vals_.size(); ++k) {
      s_left += vals_[k].second;
      if (vals_[k].first == vals_[k + 1].first) continue;
      double thr = 0.5 * (vals_[k].first + vals_[k + 1].first);
      if (thr >= vals_[k + 1].first) thr = vals_[k].first;
      consider(miss_n + k + 1, s_left, thr);
    }
  }

  const Dataset& data_;
  const ForestConfig& cfg_;
  std::mt19937_64& rng_;
  int mtry_ = 1;
  std::vector<int> order_;
  std::vector<std::pair<double, double>> vals_;
};

}  // namespace

void Dataset::check() const {
  if (y.size() != X.rows()) throw std::invalid_argument("dataset: X and y row counts differ");
  if (static_cast<Eigen::Index>(columns.size()) != X.cols()) {
    throw std::invalid_argument("dataset: column names do not match X");
  }
  if (column_groups.size() != columns.size()) throw std::invalid_argument("dataset: one group tag per column");
}

Dataset dataset_from_trials(const DesignSpace& space, std::span<const TrialRecord> history) {
  Dataset d;
  const auto p = static_cast<Eigen::Index>(space.size());
  d.X.resize(static_cast<Eigen::Index>(history.size()), p);
  d.y.resize(static_cast<Eigen::Index>(history.size()));
  for (std::size_t i = 0; i < history.size(); ++i) {
    const auto row = encode(space, history[i].point);
    for (Eigen::Index j = 0; j < p; ++j) d.X(static_cast<Eigen::Index>(i), j) = row[j];
    d.y(static_cast<Eigen::Index>(i)) = history[i].score;
  }
  for (const auto& spec : space.params()) {
    d.columns.push_back(spec.name);
    d.column_groups.push_back(spec.group);
    if (std::find(d.groups.begin(), d.groups.end(), spec.group) == d.groups.end()) d.groups.push_back(spec.group);
  }
  return d;
}

int RegressionTree::leaf_for(std::span<const double> x) const {
  int i = 0;
  while (!nodes[i].is_leaf()) {
    const auto& n = nodes[i];
    i = goes_left(x[n.feature], n.threshold) ? n.left : n.right;
  }
  return i;
}

double RegressionTree::predict(std::span<const double> x) const { return nodes[leaf_for(x)].value; }

double RegressionForest::predict(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != n_features) {
    throw std::invalid_argument("predict: expected " + std::to_string(n_features) + " features, got " +
                                std::to_string(x.size()));
  }
  if (trees.empty()) throw std::invalid_argument("predict: forest has no trees");
  double s = 0.0;
  for (const auto& t : trees) s += t.predict(x);
  return s / static_cast<double>(trees.size());
}

RegressionForest fit_forest(const Dataset& data, const ForestConfig& config, std::uint64_t seed, int jobs) {
  data.check();
  if (data.rows() < 2) throw std::invalid_argument("fit_forest: need at least 2 rows");
  if (data.cols() < 1) throw std::invalid_argument("fit_forest: dataset has no columns");
  if (config.n_trees < 1) throw std::invalid_argument("fit_forest: n_trees must be >= 1");
  if (config.min_leaf < 1) throw std::invalid_argument("fit_forest: min_leaf must be >= 1");
  if (!(config.max_features > 0.0 && config.max_features <= 1.0)) {
    throw std::invalid_argument("fit_forest: max_features must be in (0, 1]");
  }

  RegressionForest forest;
  forest.config = config;
  forest.seed = seed;
  forest.n_features = static_cast<int>(data.cols());
  forest.trees.resize(static_cast<std::size_t>(config.n_trees));

  auto fit_one = [&](int t) {
    std::mt19937_64 rng(splitmix64(seed ^ splitmix64(0xF0E57000ULL + static_cast<std::uint64_t>(t))));
    std::vector<Eigen::Index> rows(static_cast<std::size_t>(data.rows()));
    if (config.bootstrap) {
      std::uniform_int_distribution<Eigen::Index> pick(0, data.rows() - 1);
      for (auto& r : rows) r = pick(rng);
    } else {
      std::iota(rows.begin(), rows.end(), Eigen::Index{0});
    }
    TreeBuilder builder(data, config, rng);
    forest.trees[static_cast<std::size_t>(t)] = builder.build(std::move(rows));
  };

  const int workers = std::clamp(jobs, 1, config.n_trees);
  if (workers == 1) {
    for (int t = 0; t < config.n_trees; ++t) fit_one(t);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (int t = w; t < config.n_trees; t += workers) fit_one(t);
      });
    }
    for (auto& th : pool) th.join();
  }
  return forest;
}

}  // namespace handco
