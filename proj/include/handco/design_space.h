#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

namespace handco {

enum class ParamKind { kContinuous, kInteger, kCategorical };

std::string_view to_string(ParamKind kind);
ParamKind param_kind_from_string(std::string_view s);

/// `parent == value` or `parent != value`, written as e.g. "finger_number == 3".
struct Activation {
  std::string parent;
  bool equals = true;
  std::string value;

  std::string expression() const;
  static Activation parse(std::string_view expr);
};

struct ParamSpec {
  std::string name;
  ParamKind kind = ParamKind::kContinuous;
  double lo = 0.0;
  double hi = 1.0;
  std::string unit;                  // "deg", "mm" or "" for dimensionless
  std::vector<std::string> choices;  // categorical only
  std::string group;
  std::optional<Activation> activation;

  bool is_categorical() const { return kind == ParamKind::kCategorical; }
};

using ParamValue = std::variant<double, std::string>;

struct DesignPoint {
  std::map<std::string, ParamValue> values;
  std::string space_id;

  double number(const std::string& name) const;
  const std::string& choice(const std::string& name) const;
  bool has(const std::string& name) const { return values.contains(name); }
  bool operator==(const DesignPoint&) const = default;
};

/// Ordered, conditional, mixed-type parameter space. Immutable once built.
class DesignSpace {
 public:
  DesignSpace(std::string id, std::vector<ParamSpec> params);

  const std::string& id() const { return id_; }
  const std::vector<ParamSpec>& params() const { return params_; }
  std::size_t size() const { return params_.size(); }
  const ParamSpec& param(const std::string& name) const;
  std::size_t index_of(const std::string& name) const;

  /// Group tag -> member names in declaration order.
  const std::map<std::string, std::vector<std::string>>& groups() const { return groups_; }

  /// Activation of `spec` given the (possibly partial) assignment in `point`.
  bool is_active(const ParamSpec& spec, const DesignPoint& point) const;

  /// Throws std::invalid_argument describing the first violation.
  void validate(const DesignPoint& point) const;
  bool is_valid(const DesignPoint& point) const;

 private:
  std::string id_;
  std::vector<ParamSpec> params_;
  std::map<std::string, std::size_t> index_;
  std::map<std::string, std::vector<std::string>> groups_;
};

/// The 28-parameter power-grasp space.
DesignSpace build_power_grasp_space();

/// Draws every active parameter uniformly, resolving activation in
/// declaration order.
DesignPoint sample_uniform(const DesignSpace& space, std::uint64_t seed);
DesignPoint sample_uniform(const DesignSpace& space, std::mt19937_64& rng);
ParamValue sample_param(const ParamSpec& spec, std::mt19937_64& rng);

/// Marker for inactive parameters in the flat encoding.
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
inline bool is_missing(double v) { return v != v; }

std::vector<double> encode(const DesignSpace& space, const DesignPoint& point);
DesignPoint decode(const DesignSpace& space, std::span<const double> row);

nlohmann::json to_json(const DesignSpace& space);
DesignSpace space_from_json(const nlohmann::json& j);
nlohmann::json to_json(const DesignPoint& point);
DesignPoint point_from_json(const nlohmann::json& j);

}  // namespace handco
