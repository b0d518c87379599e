#include "handco/design_space.h"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace handco {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

std::string format_number(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

ParamSpec continuous(std::string name, double lo, double hi, std::string unit, std::string group) {
  ParamSpec p;
  p.name = std::move(name);
  p.kind = ParamKind::kContinuous;
  p.lo = lo;
  p.hi = hi;
  p.unit = std::move(unit);
  p.group = std::move(group);
  return p;
}

ParamSpec categorical(std::string name, std::vector<std::string> choices, std::string group) {
  ParamSpec p;
  p.name = std::move(name);
  p.kind = ParamKind::kCategorical;
  p.lo = 0;
  p.hi = static_cast<double>(choices.size()) - 1;
  p.choices = std::move(choices);
  p.group = std::move(group);
  return p;
}

}  // namespace

std::string_view to_string(ParamKind kind) {
  switch (kind) {
    case ParamKind::kContinuous: return "continuous";
    case ParamKind::kInteger: return "integer";
    case ParamKind::kCategorical: return "categorical";
  }
  return "?";
}

ParamKind param_kind_from_string(std::string_view s) {
  if (s == "continuous") return ParamKind::kContinuous;
  if (s == "integer") return ParamKind::kInteger;
  if (s == "categorical") return ParamKind::kCategorical;
  throw std::invalid_argument("unknown parameter kind '" + std::string(s) + "'");
}

std::string Activation::expression() const {
  return parent + (equals ? " == " : " != ") + value;
}

Activation Activation::parse(std::string_view expr) {
  Activation a;
  auto pos = expr.find("==");
  if (pos == std::string_view::npos) {
    pos = expr.find("!=");
    a.equals = false;
  }
  if (pos == std::string_view::npos) {
    throw std::invalid_argument("activation expression needs '==' or '!=': " + std::string(expr));
  }
  a.parent = trim(expr.substr(0, pos));
  a.value = trim(expr.substr(pos + 2));
  if (a.parent.empty() || a.value.empty()) {
    throw std::invalid_argument("malformed activation expression: " + std::string(expr));
  }
  return a;
}

double DesignPoint::number(const std::string& name) const {
  auto it = values.find(name);
  if (it == values.end()) throw std::out_of_range("design point has no parameter '" + name + "'");
  if (const auto* d = std::get_if<double>(&it->second)) return *d;
  throw std::invalid_argument("parameter '" + name + "' is categorical");
}

const std::string& DesignPoint::choice(const std::string& name) const {
  auto it = values.find(name);
  if (it == values.end()) throw std::out_of_range("design point has no parameter '" + name + "'");
  if (const auto* s = std::get_if<std::string>(&it->second)) return *s;
  throw std::invalid_argument("parameter '" + name + "' is numeric");
}

DesignSpace::DesignSpace(std::string id, std::vector<ParamSpec> params)
    : id_(std::move(id)), params_(std::move(params)) {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const ParamSpec& p = params_[i];
    if (p.name.empty()) throw std::invalid_argument("parameter with empty name");
    if (index_.contains(p.name)) throw std::invalid_argument("duplicate parameter '" + p.name + "'");
    if (p.is_categorical()) {
      if (p.choices.empty()) {
        throw std::invalid_argument("categorical '" + p.name + "' has no choices");
      }
    } else if (!(p.lo < p.hi)) {
      throw std::invalid_argument("parameter '" + p.name + "' has degenerate bounds");
    }
    if (p.activation) {
      auto it = index_.find(p.activation->parent);
      if (it == index_.end()) {
        throw std::invalid_argument("activation of '" + p.name + "' references '" +
                                    p.activation->parent + "', which is not declared earlier");
      }
      const ParamSpec& parent = params_[it->second];
      if (parent.is_categorical() &&
          std::find(parent.choices.begin(), parent.choices.end(), p.activation->value) ==
              parent.choices.end()) {
        throw std::invalid_argument("activation of '" + p.name + "' compares against unknown choice '" +
                                    p.activation->value + "'");
      }
    }
    if (p.group.empty()) throw std::invalid_argument("parameter '" + p.name + "' has no group");
    index_[p.name] = i;
    groups_[p.group].push_back(p.name);
  }
}

const ParamSpec& DesignSpace::param(const std::string& name) const {
  return params_[index_of(name)];
}

std::size_t DesignSpace::index_of(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("unknown parameter '" + name + "'");
  return it->second;
}

bool DesignSpace::is_active(const ParamSpec& spec, const DesignPoint& point) const {
  if (!spec.activation) return true;
  const Activation& a = *spec.activation;
  const ParamSpec& parent = param(a.parent);
  if (!is_active(parent, point)) return false;
  auto it = point.values.find(a.parent);
  if (it == point.values.end()) return false;
  bool eq;
  if (const auto* s = std::get_if<std::string>(&it->second)) {
    eq = *s == a.value;
  } else {
    eq = std::get<double>(it->second) == std::stod(a.value);
  }
  return eq == a.equals;
}

void DesignSpace::validate(const DesignPoint& point) const {
  if (!point.space_id.empty() && point.space_id != id_) {
    throw std::invalid_argument("design point belongs to space '" + point.space_id +
                                "', expected '" + id_ + "'");
  }
  for (const auto& [name, value] : point.values) {
    if (!index_.contains(name)) throw std::invalid_argument("unknown parameter '" + name + "'");
  }
  for (const ParamSpec& p : params_) {
    const bool active = is_active(p, point);
    auto it = point.values.find(p.name);
    if (!active) {
      if (it != point.values.end()) {
        throw std::invalid_argument("inactive parameter '" + p.name + "' is present");
      }
      continue;
    }
    if (it == point.values.end()) {
      throw std::invalid_argument("active parameter '" + p.name + "' is missing");
    }
    if (p.is_categorical()) {
      const auto* s = std::get_if<std::string>(&it->second);
      if (!s || std::find(p.choices.begin(), p.choices.end(), *s) == p.choices.end()) {
        throw std::invalid_argument("parameter '" + p.name + "' has an invalid choice");
      }
    } else {
      const auto* d = std::get_if<double>(&it->second);
      if (!d || !std::isfinite(*d) || *d < p.lo || *d > p.hi) {
        throw std::invalid_argument("parameter '" + p.name + "' is out of bounds [" +
                                    format_number(p.lo) + ", " + format_number(p.hi) + "]");
      }
      if (p.kind == ParamKind::kInteger && *d != std::round(*d)) {
        throw std::invalid_argument("integer parameter '" + p.name + "' is not integral");
      }
    }
  }
}

bool DesignSpace::is_valid(const DesignPoint& point) const {
  try {
    validate(point);
    return true;
  } catch (const std::exception&) {
    return false;
  }
}

DesignSpace build_power_grasp_space() {
  const std::string fp = "finger-pose", tp = "thumb-pose", pk = "palm-kernel", ft = "fingertip",
                    ll = "link-lengths", st = "structural";
  std::vector<ParamSpec> p;
  p.push_back(categorical("finger_number", {"2", "3"}, st));
  p.push_back(categorical("finger_code", {"1-1-1", "0-121"}, st));
  p.push_back(categorical("thumb_code", {"1-22", "0-22"}, st));

  p.push_back(continuous("index_angle", 0, 30, "deg", fp));
  p.push_back(continuous("pinky_angle", -30, 0, "deg", fp));
  p.push_back(continuous("index_normal_offset", 0, 5, "mm", fp));
  p.push_back(continuous("middle_normal_offset", 0, 10, "mm", fp));
  p.back().activation = Activation{"finger_number", true, "3"};
  p.push_back(continuous("pinky_normal_offset", 0, 5, "mm", fp));
  p.push_back(continuous("index_side_offset", 0, 30, "mm", fp));
  p.push_back(continuous("pinky_side_offset", -30, 0, "mm", fp));

  p.push_back(continuous("thumb_angle", -30, 30, "deg", tp));
  p.push_back(continuous("thumb_normal_offset", -30, 30, "mm", tp));
  p.push_back(continuous("thumb_side_offset", -40, 10, "mm", tp));

  p.push_back(continuous("pad_max_height", 0, 20, "mm", pk));
  for (const char* k : {"k0", "k1"}) {
    const std::string prefix = k;
    p.push_back(continuous(prefix + "_spread", 0.05, 0.3, "", pk));
    p.push_back(continuous(prefix + "_center_angle", 0, 360, "deg", pk));
    p.push_back(continuous(prefix + "_center_offset", 0, 1, "", pk));
    p.push_back(continuous(prefix + "_intensity", 0, 1, "", pk));
  }

  p.push_back(continuous("tip_scale_y", 1.0, 1.5, "", ft));
  p.push_back(continuous("tip_scale_z", 0.5, 1.5, "", ft));

  for (int i = 0; i < 4; ++i) {
    p.push_back(continuous("link" + std::to_string(i) + "_added", 0, 10, "mm", ll));
  }
  return DesignSpace("power_grasp_v1", std::move(p));
}

ParamValue sample_param(const ParamSpec& spec, std::mt19937_64& rng) {
  switch (spec.kind) {
    case ParamKind::kCategorical: {
      std::uniform_int_distribution<std::size_t> pick(0, spec.choices.size() - 1);
      return spec.choices[pick(rng)];
    }
    case ParamKind::kInteger: {
      std::uniform_int_distribution<long long> pick(static_cast<long long>(std::ceil(spec.lo)),
                                                    static_cast<long long>(std::floor(spec.hi)));
      return static_cast<double>(pick(rng));
    }
    case ParamKind::kContinuous:
    default: {
      std::uniform_real_distribution<double> u(spec.lo, spec.hi);
      return u(rng);
    }
  }
}

DesignPoint sample_uniform(const DesignSpace& space, std::mt19937_64& rng) {
  DesignPoint point;
  point.space_id = space.id();
  for (const ParamSpec& p : space.params()) {
    if (!space.is_active(p, point)) continue;
    point.values[p.name] = sample_param(p, rng);
  }
  return point;
}

DesignPoint sample_uniform(const DesignSpace& space, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return sample_uniform(space, rng);
}

std::vector<double> encode(const DesignSpace& space, const DesignPoint& point) {
  space.validate(point);
  std::vector<double> row(space.size(), kMissing);
  for (std::size_t i = 0; i < space.size(); ++i) {
    const ParamSpec& p = space.params()[i];
    auto it = point.values.find(p.name);
    if (it == point.values.end()) continue;
    if (p.is_categorical()) {
      const auto& s = std::get<std::string>(it->second);
      row[i] = static_cast<double>(std::find(p.choices.begin(), p.choices.end(), s) - p.choices.begin());
    } else {
      row[i] = std::get<double>(it->second);
    }
  }
  return row;
}

DesignPoint decode(const DesignSpace& space, std::span<const double> row) {
  if (row.size() != space.size()) {
    throw std::invalid_argument("decode: row has " + std::to_string(row.size()) +
                                " entries, space has " + std::to_string(space.size()));
  }
  DesignPoint point;
  point.space_id = space.id();
  for (std::size_t i = 0; i < space.size(); ++i) {
    const ParamSpec& p = space.params()[i];
    const double v = row[i];
    const bool active = space.is_active(p, point);
    if (!active) {
      if (!is_missing(v)) {
        throw std::invalid_argument("decode: inactive parameter '" + p.name + "' carries a value");
      }
      continue;
    }
    if (is_missing(v)) throw std::invalid_argument("decode: active parameter '" + p.name + "' is missing");
    if (p.is_categorical()) {
      if (v != std::round(v) || v < 0 || v >= static_cast<double>(p.choices.size())) {
        throw std::invalid_argument("decode: unknown ordinal for '" + p.name + "'");
      }
      point.values[p.name] = p.choices[static_cast<std::size_t>(v)];
    } else {
      if (!std::isfinite(v) || v < p.lo || v > p.hi) {
        throw std::invalid_argument("decode: '" + p.name + "' out of bounds");
      }
      point.values[p.name] = v;
    }
  }
  return point;
}

nlohmann::json to_json(const DesignSpace& space) {
  nlohmann::json params = nlohmann::json::array();
  for (const ParamSpec& p : space.params()) {
    nlohmann::json j;
    j["name"] = p.name;
    j["kind"] = std::string(to_string(p.kind));
    if (p.is_categorical()) {
      j["choices"] = p.choices;
    } else {
      j["bounds"] = {p.lo, p.hi};
      j["unit"] = p.unit;
    }
    j["group"] = p.group;
    j["activation"] = p.activation ? nlohmann::json(p.activation->expression()) : nlohmann::json();
    params.push_back(std::move(j));
  }
  return {{"id", space.id()}, {"params", std::move(params)}};
}

DesignSpace space_from_json(const nlohmann::json& j) {
  std::vector<ParamSpec> params;
  for (const auto& jp : j.at("params")) {
    ParamSpec p;
    p.name = jp.at("name").get<std::string>();
    p.kind = param_kind_from_string(jp.at("kind").get<std::string>());
    if (p.is_categorical()) {
      p.choices = jp.at("choices").get<std::vector<std::string>>();
      p.lo = 0;
      p.hi = static_cast<double>(p.choices.size()) - 1;
    } else {
      const auto& b = jp.at("bounds");
      p.lo = b.at(0).get<double>();
      p.hi = b.at(1).get<double>();
      p.unit = jp.value("unit", "");
    }
    p.group = jp.at("group").get<std::string>();
    if (jp.contains("activation") && !jp["activation"].is_null()) {
      p.activation = Activation::parse(jp["activation"].get<std::string>());
    }
    params.push_back(std::move(p));
  }
  return DesignSpace(j.at("id").get<std::string>(), std::move(params));
}

nlohmann::json to_json(const DesignPoint& point) {
  nlohmann::json values = nlohmann::json::object();
  for (const auto& [name, v] : point.values) {
    if (const auto* d = std::get_if<double>(&v)) {
      values[name] = *d;
    } else {
      values[name] = std::get<std::string>(v);
    }
  }
  return {{"space", point.space_id}, {"values", std::move(values)}};
}

DesignPoint point_from_json(const nlohmann::json& j) {
  DesignPoint point;
  point.space_id = j.value("space", "");
  for (const auto& [name, v] : j.at("values").items()) {
    if (v.is_number()) {
      point.values[name] = v.get<double>();
    } else if (v.is_string()) {
      point.values[name] = v.get<std::string>();
    } else {
      throw std::invalid_argument("design value for '" + name + "' must be a number or string");
    }
  }
  return point;
}

}  // namespace handco
