#include "handco/tpe.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <thread>

#include "handco/errors.h"

namespace handco {
namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

std::size_t choice_index(const ParamSpec& spec, const std::string& c) {
  const auto it = std::find(spec.choices.begin(), spec.choices.end(), c);
  if (it == spec.choices.end()) throw std::invalid_argument("unknown choice '" + c + "' for " + spec.name);
  return static_cast<std::size_t>(it - spec.choices.begin());
}

double observation(const ParamSpec& spec, const ParamValue& v) {
  if (spec.is_categorical()) return static_cast<double>(choice_index(spec, std::get<std::string>(v)));
  return std::get<double>(v);
}

ParamValue to_value(const ParamSpec& spec, double x) {
  if (spec.is_categorical()) return spec.choices.at(static_cast<std::size_t>(x));
  return x;
}

double median_score(std::span<const TrialRecord> history) {
  if (history.empty()) return 0.0;
  std::vector<double> s;
  for (const auto& t : history) s.push_back(t.score);
  std::sort(s.begin(), s.end());
  const std::size_t n = s.size();
  return n % 2 ? s[n / 2] : 0.5 * (s[n / 2 - 1] + s[n / 2]);
}

}  // namespace

Split split_trials(std::span<const TrialRecord> history, double gamma) {
  if (history.empty()) throw std::invalid_argument("split_trials: empty history");
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("split_trials: gamma must be in (0, 1)");
  std::vector<std::size_t> order(history.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (history[a].score != history[b].score) return history[a].score > history[b].score;
    return a > b;
  });
  const auto n_good = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(gamma * static_cast<double>(history.size()) - 1e-12)));
  Split s;
  s.good.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_good));
  s.bad.assign(order.begin() + static_cast<std::ptrdiff_t>(n_good), order.end());
  std::sort(s.good.begin(), s.good.end());
  std::sort(s.bad.begin(), s.bad.end());
  return s;
}

ParamDensity::ParamDensity(const ParamSpec& spec, std::vector<double> observations, double prior_weight)
    : spec_(spec), mus_(std::move(observations)), prior_weight_(prior_weight) {
  if (!(prior_weight > 0.0)) throw std::invalid_argument("prior weight must be positive");
  const double n = static_cast<double>(mus_.size());
  if (spec.is_categorical()) {
    const double k = static_cast<double>(spec.choices.size());
    probs_.assign(spec.choices.size(), prior_weight);
    for (double m : mus_) probs_.at(static_cast<std::size_t>(m)) += 1.0;
    for (double& p : probs_) p /= n + k * prior_weight;
  } else if (!mus_.empty()) {
    const double range = spec.hi - spec.lo;
    sigma_ = std::max(range * 1.06 * std::pow(n, -0.2), range * 1e-3);
  }
}

double ParamDensity::log_pdf(double x) const {
  if (spec_.is_categorical()) return std::log(probs_.at(static_cast<std::size_t>(x)));
  const double range = spec_.hi - spec_.lo;
  const double n = static_cast<double>(mus_.size());
  const double total = n + prior_weight_;
  double pdf = prior_weight_ / total / range;
  for (double mu : mus_) {
    const double mass = normal_cdf((spec_.hi - mu) / sigma_) - normal_cdf((spec_.lo - mu) / sigma_);
    const double z = (x - mu) / sigma_;
    pdf += std::exp(-0.5 * z * z) / (sigma_ * std::sqrt(2.0 * std::numbers::pi) * mass) / total;
  }
  return std::log(pdf);
}

double ParamDensity::sample(std::mt19937_64& rng) const {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  if (spec_.is_categorical()) {
    std::discrete_distribution<std::size_t> d(probs_.begin(), probs_.end());
    return static_cast<double>(d(rng));
  }
  const double n = static_cast<double>(mus_.size());
  const double pick = u01(rng) * (n + prior_weight_);
  double x;
  if (pick >= n) {
    x = spec_.lo + u01(rng) * (spec_.hi - spec_.lo);
  } else {
    const double mu = mus_[std::min(static_cast<std::size_t>(pick), mus_.size() - 1)];
    std::normal_distribution<double> g(mu, sigma_);
    x = g(rng);
    for (int tries = 0; (x < spec_.lo || x > spec_.hi) && tries < 1000; ++tries) x = g(rng);
    x = std::clamp(x, spec_.lo, spec_.hi);
  }
  if (spec_.kind == ParamKind::kInteger) x = std::clamp(std::round(x), spec_.lo, spec_.hi);
  return x;
}

DensityModel::DensityModel(const DesignSpace& space, std::map<std::string, ParamDensity> params)
    : space_(space), params_(std::move(params)) {}

double DensityModel::log_density(const DesignPoint& point) const {
  double s = 0.0;
  for (const auto& spec : space_.params()) {
    if (!space_.is_active(spec, point)) continue;
    s += params_.at(spec.name).log_pdf(observation(spec, point.values.at(spec.name)));
  }
  return s;
}

DesignPoint DensityModel::sample(std::mt19937_64& rng) const {
  DesignPoint p;
  p.space_id = space_.id();
  for (const auto& spec : space_.params()) {
    if (!space_.is_active(spec, p)) continue;
    p.values[spec.name] = to_value(spec, params_.at(spec.name).sample(rng));
  }
  return p;
}

DensityModel fit_density(std::span<const DesignPoint> points, const DesignSpace& space, double prior_weight) {
  std::map<std::string, ParamDensity> params;
  for (const auto& spec : space.params()) {
    std::vector<double> obs;
    for (const auto& p : points) {
      const auto it = p.values.find(spec.name);
      if (it != p.values.end()) obs.push_back(observation(spec, it->second));
    }
    params.emplace(spec.name, ParamDensity(spec, std::move(obs), prior_weight));
  }
  return DensityModel(space, std::move(params));
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t batch_seed(std::uint64_t seed, int batch) {
  return splitmix64(seed ^ splitmix64(0xB47C4000ULL + static_cast<std::uint64_t>(batch)));
}

std::uint64_t trial_seed(std::uint64_t seed, int index) {
  return splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(index)));
}

DesignPoint propose(const DesignSpace& space, std::span<const TrialRecord> history, const TpeConfig& cfg,
                    std::mt19937_64& rng) {
  if (history.size() < static_cast<std::size_t>(cfg.n_startup)) return sample_uniform(space, rng);
  const Split split = split_trials(history, cfg.gamma);
  std::vector<DesignPoint> good, bad;
  for (auto i : split.good) good.push_back(history[i].point);
  for (auto i : split.bad) bad.push_back(history[i].point);
  const DensityModel g = fit_density(good, space, cfg.prior_weight);
  const DensityModel b = fit_density(bad, space, cfg.prior_weight);
  DesignPoint best;
  double best_ratio = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < std::max(1, cfg.n_candidates); ++k) {
    DesignPoint c = g.sample(rng);
    const double ratio = g.log_density(c) - b.log_density(c);
    if (ratio > best_ratio || k == 0) {
      best_ratio = ratio;
      best = std::move(c);
    }
  }
  return best;
}

std::vector<DesignPoint> propose_batch(const DesignSpace& space, std::span<const TrialRecord> history,
                                       const TpeConfig& cfg, std::uint64_t seed, int batch, int size) {
  std::mt19937_64 rng(batch_seed(seed, batch));
  std::vector<TrialRecord> augmented(history.begin(), history.end());
  const double liar = median_score(history);
  std::vector<DesignPoint> out;
  for (int k = 0; k < size; ++k) {
    out.push_back(propose(space, augmented, cfg, rng));
    TrialRecord r;
    r.index = static_cast<int>(augmented.size());
    r.point = out.back();
    r.score = liar;
    augmented.push_back(std::move(r));
  }
  return out;
}

bool same_point(const DesignPoint& a, const DesignPoint& b) { return to_json(a) == to_json(b); }

OptimizeResult optimize(const Objective& objective, const DesignSpace& space, const OptimizeOptions& opts) {
  if (opts.budget < 1) throw ConfigError("budget must be >= 1");
  if (opts.batch < 1) throw ConfigError("batch must be >= 1");
  if (opts.resume.size() > static_cast<std::size_t>(opts.budget)) {
    throw ConfigError("resume conflict: journal holds " + std::to_string(opts.resume.size()) +
                      " trials but the budget is " + std::to_string(opts.budget));
  }
  OptimizeResult res;
  res.history = opts.resume;
  for (std::size_t i = 0; i < res.history.size(); ++i) {
    if (res.history[i].index != static_cast<int>(i)) {
      throw ConfigError("resume conflict: journal trial " + std::to_string(i) + " has index " +
                        std::to_string(res.history[i].index));
    }
  }

  for (int b = 0; b * opts.batch < opts.budget; ++b) {
    const int start = b * opts.batch;
    const int size = std::min(opts.batch, opts.budget - start);
    if (res.history.size() >= static_cast<std::size_t>(start + size)) {
      // Fully journaled batch: the replay still has to agree with it.
      const auto replay = propose_batch(space, std::span(res.history).first(start), opts.tpe, opts.seed, b, size);
      for (int k = 0; k < size; ++k) {
        const auto& rec = res.history[start + k];
        if (!same_point(rec.point, replay[k]) || rec.batch != b || rec.seed != trial_seed(opts.seed, start + k)) {
          throw ConfigError("resume conflict at trial " + std::to_string(start + k) +
                            ": journal does not match the configured seed and settings");
        }
      }
      continue;
    }
    const auto proposals =
        propose_batch(space, std::span(res.history).first(start), opts.tpe, opts.seed, b, size);
    const int have = static_cast<int>(res.history.size()) - start;
    for (int k = 0; k < have; ++k) {
      if (!same_point(res.history[start + k].point, proposals[k])) {
        throw ConfigError("resume conflict at trial " + std::to_string(start + k) +
                          ": journal does not match the configured seed and settings");
      }
    }

    std::vector<TrialRecord> fresh(static_cast<std::size_t>(size - have));
    auto run = [&](std::size_t i) {
      const int idx = start + have + static_cast<int>(i);
      TrialRecord& r = fresh[i];
      r.index = idx;
      r.batch = b;
      r.point = proposals[have + i];
      r.seed = trial_seed(opts.seed, idx);
      try {
        ObjectiveResult o = objective(r.point, r.seed);
        r.score = o.score;
        r.status = o.status;
        r.info = std::move(o.info);
      } catch (const std::exception& e) {
        r.score = 0.0;
        r.status = std::string("error: ") + e.what();
      }
      if (!std::isfinite(r.score)) {
        r.score = 0.0;
        r.status = "error: non-finite score";
      }
    };
    const int jobs = std::max(1, std::min<int>(opts.jobs, static_cast<int>(fresh.size())));
    if (jobs == 1) {
      for (std::size_t i = 0; i < fresh.size(); ++i) run(i);
    } else {
      std::atomic<std::size_t> next{0};
      std::vector<std::thread> pool;
      for (int t = 0; t < jobs; ++t) {
        pool.emplace_back([&] {
          for (std::size_t i; (i = next++) < fresh.size();) run(i);
        });
      }
      for (auto& th : pool) th.join();
    }
    for (auto& r : fresh) {
      res.history.push_back(std::move(r));
      if (opts.on_trial) opts.on_trial(res.history.back());
    }
  }

  for (std::size_t i = 1; i < res.history.size(); ++i) {
    if (res.history[i].score > res.history[res.best].score) res.best = i;
  }
  return res;
}

Objective repeat_mean(Objective inner, int repeats) {
  if (repeats < 1) throw std::invalid_argument("repeat_mean: repeats must be >= 1");
  return [inner = std::move(inner), repeats](const DesignPoint& p, std::uint64_t seed) {
    ObjectiveResult out;
    nlohmann::json scores = nlohmann::json::array();
    double sum = 0.0;
    for (int r = 0; r < repeats; ++r) {
      const ObjectiveResult one = inner(p, r == 0 ? seed : splitmix64(seed + static_cast<std::uint64_t>(r)));
      sum += one.score;
      scores.push_back(one.score);
      if (one.status != "ok" && out.status == "ok") out.status = one.status;
    }
    out.score = sum / repeats;
    out.info = {{"repeat_scores", scores}};
    return out;
  };
}

std::vector<double> best_so_far(std::span<const TrialRecord> history) {
  std::vector<double> out;
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& t : history) {
    best = std::max(best, t.score);
    out.push_back(best);
  }
  return out;
}

}  // namespace handco
