#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "handco/design_space.h"

namespace handco {

struct TpeConfig {
  double gamma = 0.25;
  int n_startup = 20;
  int n_candidates = 24;
  double prior_weight = 1.0;
  std::string bandwidth_rule = "range-silverman";  // the only rule implemented
};

struct TrialRecord {
  int index = 0;
  int batch = 0;
  DesignPoint point;
  double score = 0.0;
  std::uint64_t seed = 0;
  std::string status = "ok";  // ok | infeasible | error: <what>
  nlohmann::json info;        // objective-specific detail, may be null
};

struct Split {
  std::vector<std::size_t> good;  // indices into the history
  std::vector<std::size_t> bad;
};

/// |good| = max(1, ceil(gamma n)); equal scores rank newer trials first.
Split split_trials(std::span<const TrialRecord> history, double gamma);

/// One-dimensional estimator for a single parameter.
class ParamDensity {
 public:
  ParamDensity(const ParamSpec& spec, std::vector<double> observations, double prior_weight);

  double log_pdf(double x) const;  // categorical: x is the choice ordinal
  double sample(std::mt19937_64& rng) const;
  double bandwidth() const { return sigma_; }
  const std::vector<double>& probabilities() const { return probs_; }

 private:
  ParamSpec spec_;
  std::vector<double> mus_;
  double sigma_ = 0.0;
  double prior_weight_ = 1.0;
  std::vector<double> probs_;  // categorical only
};

class DensityModel {
 public:
  DensityModel(const DesignSpace& space, std::map<std::string, ParamDensity> params);

  /// Sum over the point's active parameters.
  double log_density(const DesignPoint& point) const;
  /// Ancestor-first draw: a parameter is sampled only when active given the
  /// values drawn before it.
  DesignPoint sample(std::mt19937_64& rng) const;
  const ParamDensity& param(const std::string& name) const { return params_.at(name); }

 private:
  DesignSpace space_;
  std::map<std::string, ParamDensity> params_;
};

/// A parameter's estimator is fit on the points where it is active. An empty
/// list gives the prior alone.
DensityModel fit_density(std::span<const DesignPoint> points, const DesignSpace& space,
                         double prior_weight = 1.0);

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t batch_seed(std::uint64_t seed, int batch);
std::uint64_t trial_seed(std::uint64_t seed, int index);

/// Single proposal from `history`.
DesignPoint propose(const DesignSpace& space, std::span<const TrialRecord> history,
                    const TpeConfig& cfg, std::mt19937_64& rng);

/// `size` proposals for batch `batch`; earlier proposals of the batch enter
/// the history with the current median score (constant liar).
std::vector<DesignPoint> propose_batch(const DesignSpace& space, std::span<const TrialRecord> history,
                                       const TpeConfig& cfg, std::uint64_t seed, int batch, int size);

struct ObjectiveResult {
  double score = 0.0;
  std::string status = "ok";
  nlohmann::json info;
};
using Objective = std::function<ObjectiveResult(const DesignPoint&, std::uint64_t trial_seed)>;

/// Evaluates `inner` `repeats` times with seeds derived from the trial seed
/// and reports the mean score. Any non-"ok" repeat makes the trial take that
/// status; info.repeat_scores lists the individual scores.
Objective repeat_mean(Objective inner, int repeats);

struct OptimizeOptions {
  int budget = 1;
  int batch = 1;
  int jobs = 1;
  std::uint64_t seed = 0;
  TpeConfig tpe;
  /// Trials already on record; they are checked against the replayed
  /// proposals and not re-evaluated.
  std::vector<TrialRecord> resume;
  std::function<void(const TrialRecord&)> on_trial;
};

struct OptimizeResult {
  std::vector<TrialRecord> history;
  std::size_t best = 0;
};

/// Runs exactly `budget` evaluations. Objective exceptions and non-finite
/// scores are recorded as score 0. Throws ConfigError on resume conflicts.
OptimizeResult optimize(const Objective& objective, const DesignSpace& space,
                        const OptimizeOptions& opts);

/// Running maximum of the scores.
std::vector<double> best_so_far(std::span<const TrialRecord> history);

bool same_point(const DesignPoint& a, const DesignPoint& b);

}  // namespace handco
