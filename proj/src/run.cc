#include "handco/run.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "handco/errors.h"
#include "handco/urdf.h"

namespace handco {
namespace fs = std::filesystem;
namespace {

nlohmann::json read_json_file(const fs::path& path, const std::string& what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + what + " " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed " + what + " " + path.string() + ": " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw std::runtime_error("failed to write " + path.string());
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string csv_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

nlohmann::json tpe_json(const TpeConfig& t) {
  return {{"gamma", t.gamma},
          {"n_startup", t.n_startup},
          {"n_candidates", t.n_candidates},
          {"prior_weight", t.prior_weight},
          {"bandwidth_rule", t.bandwidth_rule}};
}

TpeConfig tpe_from(const nlohmann::json& j) {
  TpeConfig t;
  t.gamma = j.at("gamma").get<double>();
  t.n_startup = j.at("n_startup").get<int>();
  t.n_candidates = j.at("n_candidates").get<int>();
  t.prior_weight = j.at("prior_weight").get<double>();
  t.bandwidth_rule = j.at("bandwidth_rule").get<std::string>();
  return t;
}

void check_tpe(const TpeConfig& t, const std::string& name) {
  if (!(t.gamma > 0 && t.gamma <= 1)) throw ConfigError(name + ".gamma must be in (0, 1]");
  if (t.n_startup < 0) throw ConfigError(name + ".n_startup must be >= 0");
  if (t.n_candidates < 1) throw ConfigError(name + ".n_candidates must be >= 1");
  if (!(t.prior_weight > 0)) throw ConfigError(name + ".prior_weight must be > 0");
  if (t.bandwidth_rule != "range-silverman") {
    throw ConfigError(name + ".bandwidth_rule '" + t.bandwidth_rule + "' is not supported");
  }
}

// Every key of `given` must exist in `reference` (objects recursively).
void check_keys(const nlohmann::json& given, const nlohmann::json& reference, const std::string& prefix) {
  if (!given.is_object()) throw ConfigError("config " + (prefix.empty() ? "root" : prefix) + " must be an object");
  for (const auto& [key, value] : given.items()) {
    const std::string path = prefix.empty() ? key : prefix + "." + key;
    if (!reference.contains(key)) throw ConfigError("unknown config key '" + path + "'");
    if (reference.at(key).is_object()) check_keys(value, reference.at(key), path);
  }
}

bool is_tool_file(const std::string& t) {
  return t.find('/') != std::string::npos || (t.size() > 5 && t.ends_with(".json"));
}

std::string value_text(const ParamValue& v) {
  if (const auto* s = std::get_if<std::string>(&v)) return *s;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", std::get<double>(v));
  return buf;
}

DesignPoint read_design(const fs::path& path, const DesignSpace& space) {
  const nlohmann::json j = read_json_file(path, "design file");
  DesignPoint p;
  try {
    p = point_from_json(j);
    space.validate(p);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError("invalid design file " + path.string() + ": " + e.what());
  }
  return p;
}

std::string choice_or(const DesignPoint& p, const std::string& name) {
  return p.has(name) ? p.choice(name) : "-";
}

std::string design_id(int trial) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "t%04d", trial);
  return buf;
}

std::vector<std::size_t> ranked(const std::vector<TrialRecord>& history) {
  std::vector<std::size_t> idx(history.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return history[a].score > history[b].score; });
  return idx;
}

nlohmann::json grasp_json(const GraspResult& r) {
  nlohmann::json contacts = nlohmann::json::array();
  for (const auto& c : r.contacts.contacts) {
    contacts.push_back({{"link", c.link},
                        {"point", {c.point.x(), c.point.y(), c.point.z()}},
                        {"normal", {c.normal.x(), c.normal.y(), c.normal.z()}},
                        {"distance", c.distance}});
  }
  return {{"feasible", r.contacts.feasible},
          {"score", r.score.s_t},
          {"per_direction", r.score.per_direction},
          {"t_grasp", pose_to_json(r.config.t_grasp)},
          {"spread_deg", r.config.spread},
          {"contacts", contacts}};
}

HandModel load_hand_dir(const fs::path& dir, const RunConfig& cfg) {
  if (!fs::exists(dir / "hand.urdf")) throw ConfigError("missing URDF: " + (dir / "hand.urdf").string());
  const DesignPoint p = read_design(dir / "design.json", load_space(cfg));
  HandModel hand = assemble_hand(p, hand_options(cfg));
  return hand;
}

}  // namespace

void RunConfig::validate() const {
  if (grasp_budget < 1) throw ConfigError("grasp_budget must be >= 1");
  if (hand_budget < 1) throw ConfigError("hand_budget must be >= 1");
  if (batch < 1) throw ConfigError("batch must be >= 1");
  if (jobs < 1) throw ConfigError("jobs must be >= 1");
  if (k_best < 1) throw ConfigError("k_best must be >= 1");
  if (k_best > grasp_budget) throw ConfigError("k_best cannot exceed grasp_budget");
  if (resolution < 2) throw ConfigError("resolution must be >= 2");
  if (top_n < 0) throw ConfigError("top_n must be >= 0");
  if (tools.empty()) throw ConfigError("tool set is empty");
  for (const auto& t : tools) {
    if (is_tool_file(t)) {
      if (!fs::exists(t)) throw ConfigError("tool file " + t + " does not exist");
    } else {
      builtin_tool(t);
    }
  }
  if (!space.empty() && !fs::exists(space)) throw ConfigError("space file " + space + " does not exist");
  const auto& w = grasp.wrench;
  if (!(w.f_max > 0 && w.tau_max > 0 && w.t_max > 0 && w.torque_scale > 0)) {
    throw ConfigError("wrench limits and torque scale must be positive");
  }
  if (w.cone_edges < 3) throw ConfigError("wrench.cone_edges must be >= 3");
  const auto& c = grasp.closing;
  if (!(c.step_deg > 0 && c.tolerance > 0)) throw ConfigError("closing step and tolerance must be positive");
  if (!(c.mu >= 0)) throw ConfigError("closing.mu must be >= 0");
  if (!(c.cap > 0)) throw ConfigError("closing.force_cap must be > 0");
  if ((grasp.bounds.translation_mm.array() < 0).any() || (grasp.bounds.rotation_deg.array() < 0).any()) {
    throw ConfigError("perturbation bounds must be non-negative");
  }
  if (grasp.bounds.spread_lo_deg > grasp.bounds.spread_hi_deg) throw ConfigError("spread_deg must be [lo, hi]");
  check_tpe(grasp.tpe, "grasp_tpe");
  check_tpe(hand_tpe, "hand_tpe");
  if (forest.n_trees < 1 || forest.min_leaf < 1) throw ConfigError("forest.n_trees and min_leaf must be >= 1");
  if (!(forest.max_features > 0 && forest.max_features <= 1)) throw ConfigError("forest.max_features must be in (0, 1]");
}

nlohmann::json to_json(const RunConfig& cfg) {
  const auto& w = cfg.grasp.wrench;
  const auto& c = cfg.grasp.closing;
  const auto& b = cfg.grasp.bounds;
  nlohmann::json j;
  j["space"] = cfg.space;
  j["tools"] = cfg.tools;
  j["k_best"] = cfg.k_best;
  j["grasp_budget"] = cfg.grasp_budget;
  j["hand_budget"] = cfg.hand_budget;
  j["batch"] = cfg.batch;
  j["jobs"] = cfg.jobs;
  j["resolution"] = cfg.resolution;
  j["seed"] = cfg.seed;
  j["top_n"] = cfg.top_n;
  j["analysis_seed"] = cfg.analysis_seed;
  j["closing"] = {{"step_deg", c.step_deg}, {"tolerance_mm", c.tolerance}, {"mu", c.mu}, {"force_cap", c.cap}};
  j["wrench"] = {{"f_max", w.f_max},
                 {"tau_max", w.tau_max},
                 {"t_max", w.t_max},
                 {"delta_p", w.delta_p},
                 {"delta_theta", w.delta_theta},
                 {"cone_edges", w.cone_edges},
                 {"torque_scale", w.torque_scale},
                 {"gravity", w.gravity}};
  j["perturbation"] = {
      {"translation_mm", {b.translation_mm.x(), b.translation_mm.y(), b.translation_mm.z()}},
      {"rotation_deg", {b.rotation_deg.x(), b.rotation_deg.y(), b.rotation_deg.z()}},
      {"spread_deg", {b.spread_lo_deg, b.spread_hi_deg}}};
  j["grasp_tpe"] = tpe_json(cfg.grasp.tpe);
  j["hand_tpe"] = tpe_json(cfg.hand_tpe);
  j["forest"] = {{"n_trees", cfg.forest.n_trees},
                 {"max_depth", cfg.forest.max_depth},
                 {"min_leaf", cfg.forest.min_leaf},
                 {"max_features", cfg.forest.max_features},
                 {"bootstrap", cfg.forest.bootstrap}};
  return j;
}

RunConfig run_config_from_json(const nlohmann::json& given) {
  nlohmann::json j = to_json(RunConfig{});
  check_keys(given, j, "");
  j.merge_patch(given);
  try {
    RunConfig cfg;
    cfg.space = j.at("space").get<std::string>();
    cfg.tools = j.at("tools").get<std::vector<std::string>>();
    cfg.k_best = j.at("k_best").get<int>();
    cfg.grasp_budget = j.at("grasp_budget").get<int>();
    cfg.hand_budget = j.at("hand_budget").get<int>();
    cfg.batch = j.at("batch").get<int>();
    cfg.jobs = j.at("jobs").get<int>();
    cfg.resolution = j.at("resolution").get<int>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.top_n = j.at("top_n").get<int>();
    cfg.analysis_seed = j.at("analysis_seed").get<std::uint64_t>();
    const auto& c = j.at("closing");
    cfg.grasp.closing.step_deg = c.at("step_deg").get<double>();
    cfg.grasp.closing.tolerance = c.at("tolerance_mm").get<double>();
    cfg.grasp.closing.mu = c.at("mu").get<double>();
    cfg.grasp.closing.cap = c.at("force_cap").get<double>();
    const auto& w = j.at("wrench");
    auto& ws = cfg.grasp.wrench;
    ws.f_max = w.at("f_max").get<double>();
    ws.tau_max = w.at("tau_max").get<double>();
    ws.t_max = w.at("t_max").get<double>();
    ws.delta_p = w.at("delta_p").get<double>();
    ws.delta_theta = w.at("delta_theta").get<double>();
    ws.cone_edges = w.at("cone_edges").get<int>();
    ws.torque_scale = w.at("torque_scale").get<double>();
    ws.gravity = w.at("gravity").get<bool>();
    const auto& b = j.at("perturbation");
    const auto t = b.at("translation_mm").get<std::vector<double>>();
    const auto r = b.at("rotation_deg").get<std::vector<double>>();
    const auto s = b.at("spread_deg").get<std::vector<double>>();
    if (t.size() != 3 || r.size() != 3 || s.size() != 2) {
      throw ConfigError("perturbation expects 3 translations, 3 rotations and a [lo, hi] spread");
    }
    cfg.grasp.bounds.translation_mm = Vec3(t[0], t[1], t[2]);
    cfg.grasp.bounds.rotation_deg = Vec3(r[0], r[1], r[2]);
    cfg.grasp.bounds.spread_lo_deg = s[0];
    cfg.grasp.bounds.spread_hi_deg = s[1];
    cfg.grasp.tpe = tpe_from(j.at("grasp_tpe"));
    cfg.hand_tpe = tpe_from(j.at("hand_tpe"));
    const auto& f = j.at("forest");
    cfg.forest.n_trees = f.at("n_trees").get<int>();
    cfg.forest.max_depth = f.at("max_depth").get<int>();
    cfg.forest.min_leaf = f.at("min_leaf").get<int>();
    cfg.forest.max_features = f.at("max_features").get<double>();
    cfg.forest.bootstrap = f.at("bootstrap").get<bool>();
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config value has the wrong type: ") + e.what());
  }
}

RunConfig load_run_config(const fs::path& path) { return run_config_from_json(read_json_file(path, "config")); }

void apply_override(nlohmann::json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects key=value, got '" + assignment + "'");
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  nlohmann::json value;
  try {
    value = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception&) {
    value = text;
  }
  const nlohmann::json reference = to_json(RunConfig{});
  const nlohmann::json* ref = &reference;
  nlohmann::json* node = &doc;
  std::stringstream parts(key);
  std::string part;
  std::vector<std::string> path;
  while (std::getline(parts, part, '.')) path.push_back(part);
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (!ref->is_object() || !ref->contains(path[i])) throw ConfigError("unknown config key '" + key + "'");
    ref = &ref->at(path[i]);
    if (i + 1 < path.size()) {
      if (!node->contains(path[i])) (*node)[path[i]] = nlohmann::json::object();
      node = &(*node)[path[i]];
    }
  }
  if (ref->is_object()) throw ConfigError("config key '" + key + "' is a section, not a value");
  (*node)[path.back()] = value;
}

nlohmann::json resume_identity(const RunConfig& cfg) {
  nlohmann::json j = to_json(cfg);
  j.erase("jobs");
  j.erase("hand_budget");
  j.erase("top_n");
  j.erase("analysis_seed");
  j.erase("forest");
  return j;
}

DesignSpace load_space(const RunConfig& cfg) {
  if (cfg.space.empty()) return build_power_grasp_space();
  const nlohmann::json j = read_json_file(cfg.space, "space file");
  try {
    return space_from_json(j);
  } catch (const std::exception& e) {
    throw ConfigError("invalid space file " + cfg.space + ": " + e.what());
  }
}

std::vector<ToolModel> load_tools(const RunConfig& cfg) {
  std::vector<ToolModel> out;
  for (const auto& t : cfg.tools) {
    out.push_back(is_tool_file(t) ? tool_from_json(read_json_file(t, "tool file")) : builtin_tool(t));
    for (std::size_t i = 0; i + 1 < out.size(); ++i) {
      if (out[i].name == out.back().name) throw ConfigError("tool '" + out.back().name + "' is listed twice");
    }
  }
  return out;
}

HandOptions hand_options(const RunConfig& cfg) {
  HandOptions o;
  o.pad_resolution = cfg.resolution;
  return o;
}

std::uint64_t tool_seed(std::uint64_t seed, std::size_t tool_index) {
  return splitmix64(seed ^ splitmix64(0x7001000ULL + tool_index));
}

HandEvaluation evaluate_hand(const HandModel& hand, const std::vector<ToolModel>& tools, const RunConfig& cfg,
                             std::uint64_t seed) {
  HandEvaluation out;
  out.feasible = hand.feasible;
  out.reason = hand.infeasible_reason;
  if (!hand.feasible) return out;
  std::map<std::string, std::vector<double>> scores;
  for (std::size_t i = 0; i < tools.size(); ++i) {
    ToolEvaluation te;
    te.tool = tools[i].name;
    te.search = optimize_grasp(hand, tools[i], cfg.grasp_budget, tool_seed(seed, i), cfg.grasp);
    auto& s = scores[te.tool];
    for (const auto& r : te.search.history) s.push_back(r.score);
    out.tools.push_back(std::move(te));
  }
  out.score = hand_score(scores, cfg.k_best);
  return out;
}

double hand_score_from_journal(const std::vector<TrialRecord>& grasp_trials, int k) {
  std::map<std::string, std::vector<double>> scores;
  for (const auto& r : grasp_trials) {
    if (!r.info.is_object() || !r.info.contains("tool")) {
      throw ConfigError("grasp journal line " + std::to_string(r.index) + " has no tool tag");
    }
    scores[r.info.at("tool").get<std::string>()].push_back(r.score);
  }
  return hand_score(scores, k);
}

ExportResult export_design(const DesignPoint& point, const HandOptions& opts, const fs::path& dir) {
  const HandModel hand = assemble_hand(point, opts);
  if (!hand.feasible) throw ConfigError("design is infeasible: " + hand.infeasible_reason);
  check_exportable(hand);
  fs::path staging = dir;
  staging += ".partial";
  fs::remove_all(staging);
  try {
    fs::create_directories(staging);
    write_text(staging / "design.json", to_json(point).dump(2) + "\n");
    ExportResult r = export_urdf(hand, staging);
    fs::remove_all(dir);
    fs::rename(staging, dir);
    r.urdf = dir / r.urdf.filename();
    return r;
  } catch (...) {
    std::error_code ec;
    fs::remove_all(staging, ec);
    throw;
  }
}

std::vector<CurveRow> curve_rows(const std::vector<TrialRecord>& history) {
  std::vector<CurveRow> rows;
  double best = -std::numeric_limits<double>::infinity();
  std::size_t i = 0;
  while (i < history.size()) {
    const int b = history[i].batch;
    double sum = 0.0;
    int n = 0;
    for (; i < history.size() && history[i].batch == b; ++i, ++n) {
      sum += history[i].score;
      best = std::max(best, history[i].score);
    }
    rows.push_back({b, static_cast<int>(i), sum / n, best});
  }
  return rows;
}

void write_curve_csv(const fs::path& path, const std::vector<CurveRow>& rows) {
  std::ostringstream out;
  out << "iteration,trials,batch_mean,best_so_far\n";
  for (const auto& r : rows) {
    out << r.iteration << ',' << r.trials << ',' << csv_number(r.batch_mean) << ',' << csv_number(r.best_so_far)
        << '\n';
  }
  write_text(path, out.str());
}

DecileSummary top_decile(const std::vector<TrialRecord>& history) {
  DecileSummary d;
  if (history.empty()) return d;
  d.size = std::max<std::size_t>(1, (history.size() + 9) / 10);
  const auto order = ranked(history);
  std::size_t three = 0;
  for (std::size_t i = 0; i < d.size; ++i) {
    const auto& p = history[order[i]].point;
    if (choice_or(p, "finger_number") == "3") ++three;
  }
  d.three_finger_fraction = static_cast<double>(three) / static_cast<double>(d.size);
  return d;
}

ExportResult cmd_generate(const GenerateArgs& args, std::ostream& log) {
  if (args.out.empty()) throw ConfigError("generate needs --out");
  if (args.resolution < 2) throw ConfigError("resolution must be >= 2");
  const DesignSpace space = build_power_grasp_space();
  const DesignPoint point =
      args.design_file.empty() ? sample_uniform(space, args.seed) : read_design(args.design_file, space);
  HandOptions opts;
  opts.pad_resolution = args.resolution;

  log << "design (" << space.size() << " parameters)\n";
  for (const auto& spec : space.params()) {
    const auto it = point.values.find(spec.name);
    log << "  " << spec.name << " = " << (it == point.values.end() ? "inactive" : value_text(it->second)) << '\n';
  }
  const ExportResult r = export_design(point, opts, args.out);
  const HandModel hand = assemble_hand(point, opts);
  log << "palm: " << hand.palm.mesh.triangles.size() << " triangles, " << hand.palm.colliders.size()
      << " convex colliders\n";
  for (const auto& c : hand.chains) {
    log << c.digit << ": " << c.dof() << " joints, " << c.links.size() << " links\n";
  }
  log << "links " << r.links << ", joints " << r.joints << ", mesh files " << r.mesh_files.size() << '\n';
  log << "wrote " << r.urdf.string() << '\n';
  return r;
}

HandEvaluation cmd_evaluate(const EvaluateArgs& args, std::ostream& log) {
  args.config.validate();
  const HandModel hand = load_hand_dir(args.hand_dir, args.config);
  const auto tools = load_tools(args.config);
  const HandEvaluation ev = evaluate_hand(hand, tools, args.config, args.config.seed);
  const fs::path journal = args.journal.empty() ? args.hand_dir / "evaluate.jsonl" : args.journal;
  std::vector<TrialRecord> lines;
  for (const auto& te : ev.tools) {
    for (auto r : te.search.history) {
      r.info["tool"] = te.tool;
      lines.push_back(std::move(r));
    }
  }
  write_journal(journal, lines);

  if (!ev.feasible) log << "hand is infeasible: " << ev.reason << '\n';
  for (const auto& te : ev.tools) {
    log << te.tool << ": best S_t " << fmt(te.search.best.score.s_t) << " over " << te.search.history.size()
        << " grasps\n";
  }
  log << "S_h (K=" << args.config.k_best << ") " << fmt(ev.score) << '\n';
  log << "journal " << journal.string() << '\n';
  return ev;
}

GraspSearch cmd_optimize_grasp(const OptimizeGraspArgs& args, std::ostream& log) {
  args.config.validate();
  const HandModel hand = load_hand_dir(args.hand_dir, args.config);
  RunConfig one = args.config;
  one.tools = {args.tool};
  const ToolModel tool = load_tools(one).front();
  if (!hand.feasible) throw ConfigError("hand is infeasible: " + hand.infeasible_reason);
  const GraspSearch s = optimize_grasp(hand, tool, args.config.grasp_budget, args.config.seed, args.config.grasp);
  const fs::path out = args.out.empty() ? args.hand_dir / ("grasp_" + tool.name) : args.out;
  fs::create_directories(out);
  write_journal(out / "grasps.jsonl", s.history);
  nlohmann::json best = grasp_json(s.best);
  best["tool"] = tool.name;
  write_text(out / "best_grasp.json", best.dump(2) + "\n");
  log << tool.name << ": best S_t " << fmt(s.best.score.s_t) << " with " << s.best.contacts.contacts.size()
      << " contacts after " << s.history.size() << " grasps\n";
  log << "wrote " << (out / "best_grasp.json").string() << '\n';
  return s;
}

OptimizeResult cmd_optimize_hand(const OptimizeHandArgs& args, std::ostream& log) {
  const RunConfig& cfg = args.config;
  cfg.validate();
  const fs::path dir = args.run_dir;
  const fs::path config_path = dir / "config.json";
  const fs::path journal_path = dir / "trials.jsonl";
  fs::create_directories(dir);

  std::vector<TrialRecord> previous;
  if (fs::exists(journal_path)) previous = read_journal(journal_path);
  if (!previous.empty() && !args.resume) {
    throw ConfigError(dir.string() + " already holds " + std::to_string(previous.size()) +
                      " trials; pass --resume to continue it");
  }
  if (args.resume && fs::exists(config_path)) {
    const RunConfig stored = load_run_config(config_path);
    if (resume_identity(stored) != resume_identity(cfg)) {
      const auto patch = nlohmann::json::diff(resume_identity(stored), resume_identity(cfg));
      throw ConfigError("resume conflict: config differs from " + config_path.string() + ": " + patch.dump());
    }
  }
  write_text(config_path, to_json(cfg).dump(2) + "\n");
  write_journal(journal_path, previous);  // drops a torn tail

  const DesignSpace space = load_space(cfg);
  const auto tools = load_tools(cfg);
  const HandOptions hopts = hand_options(cfg);
  const Objective objective = [&](const DesignPoint& p, std::uint64_t seed) {
    const HandModel hand = assemble_hand(p, hopts);
    const HandEvaluation ev = evaluate_hand(hand, tools, cfg, seed);
    ObjectiveResult o;
    o.score = ev.score;
    o.status = ev.feasible ? "ok" : "infeasible";
    nlohmann::json per_tool = nlohmann::json::object();
    for (const auto& te : ev.tools) per_tool[te.tool] = te.search.best.score.s_t;
    o.info = {{"tools", per_tool}};
    if (!ev.feasible) o.info["reason"] = ev.reason;
    return o;
  };

  JournalWriter writer(journal_path);
  OptimizeOptions opts;
  opts.budget = cfg.hand_budget;
  if (args.stop_after >= 0) {
    opts.budget = std::min(cfg.hand_budget, static_cast<int>(previous.size()) + args.stop_after);
    opts.budget = std::max(opts.budget, 1);
  }
  opts.batch = cfg.batch;
  opts.jobs = cfg.jobs;
  opts.seed = cfg.seed;
  opts.tpe = cfg.hand_tpe;
  opts.resume = previous;
  opts.on_trial = [&](const TrialRecord& r) {
    writer.append(r);
    log << "trial " << r.index << " batch " << r.batch << " score " << fmt(r.score) << ' ' << r.status << '\n';
  };
  OptimizeResult res = optimize(objective, space, opts);

  write_curve_csv(dir / "curve.csv", curve_rows(res.history));
  fs::remove_all(dir / "designs");
  const auto order = ranked(res.history);
  int exported = 0;
  for (std::size_t i = 0; i < order.size() && exported < cfg.top_n; ++i) {
    const TrialRecord& r = res.history[order[i]];
    if (r.status != "ok") continue;
    export_design(r.point, hopts, dir / "designs" / design_id(r.index));
    ++exported;
  }
  const auto& best = res.history[res.best];
  const DecileSummary dec = top_decile(res.history);
  log << res.history.size() << " trials, best " << fmt(best.score) << " at trial " << best.index
      << " (finger_number " << choice_or(best.point, "finger_number") << ")\n";
  log << "top decile: " << dec.size << " designs, " << fmt(dec.three_finger_fraction)
      << " with three fingers\n";
  return res;
}

ImportanceTable cmd_analyze(const AnalyzeArgs& args, std::ostream& log) {
  const RunConfig cfg = load_run_config(args.run_dir / "config.json");
  const DesignSpace space = load_space(cfg);
  const auto history = read_journal(args.run_dir / "trials.jsonl");
  if (history.size() < 30) {
    throw ConfigError("journal holds " + std::to_string(history.size()) + " trials; analyze needs at least 30");
  }
  const Dataset data = dataset_from_trials(space, history);
  const RegressionForest forest = fit_forest(data, cfg.forest, cfg.analysis_seed, args.jobs);
  const auto expl = explain_rows(forest, data, args.jobs);
  double worst = 0.0;
  for (const auto& e : expl) {
    double s = e.base_value;
    for (double p : e.phi) s += p;
    worst = std::max(worst, std::abs(s - e.prediction));
  }
  if (worst > 1e-9) {
    throw InvariantViolation("SHAP local accuracy violated by " + csv_number(worst));
  }
  const ImportanceTable table = group_importance(expl, data);
  const fs::path report = args.run_dir / "report";
  fs::create_directories(report);
  write_shap_csv(report / "shap.csv", expl, data);
  write_importance_csv(report / "importance.csv", table);
  write_shap_long_csv(report / "shap_long.csv", expl, data);

  log << "surrogate: " << forest.trees.size() << " trees over " << data.rows() << " trials, local accuracy "
      << csv_number(worst) << '\n';
  for (const auto& g : table.groups) log << "  " << g.group << ' ' << fmt(g.importance) << '\n';
  log << "wrote " << (report / "importance.csv").string() << '\n';
  return table;
}

void cmd_report(const fs::path& run_dir, std::ostream& log) {
  const auto history = read_journal(run_dir / "trials.jsonl");
  if (history.empty()) throw ConfigError("journal " + (run_dir / "trials.jsonl").string() + " is empty");
  const auto rows = curve_rows(history);
  bool monotone = true;
  for (std::size_t i = 1; i < rows.size(); ++i) monotone = monotone && rows[i].best_so_far >= rows[i - 1].best_so_far;
  const auto order = ranked(history);
  const auto& best = history[order.front()];
  const DecileSummary dec = top_decile(history);
  std::size_t three = 0;
  for (const auto& r : history) three += choice_or(r.point, "finger_number") == "3";

  nlohmann::json s;
  s["trials"] = history.size();
  s["best"] = {{"trial", best.index}, {"score", best.score}, {"design", to_json(best.point)}};
  s["curve"] = {{"rows", rows.size()}, {"final_best", rows.back().best_so_far}, {"non_decreasing", monotone}};
  s["three_finger_fraction"] = static_cast<double>(three) / static_cast<double>(history.size());
  s["top_decile"] = {{"size", dec.size}, {"three_finger_fraction", dec.three_finger_fraction}};

  const fs::path imp = run_dir / "report" / "importance.csv";
  if (fs::exists(imp)) {
    std::ifstream in(imp);
    std::string line;
    nlohmann::json groups = nlohmann::json::array();
    std::getline(in, line);
    while (std::getline(in, line)) {
      std::vector<std::string> f;
      std::stringstream ss(line);
      for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
      if (f.size() >= 5 && f[0] == "group") groups.push_back({{"group", f[2]}, {"importance", std::stod(f[4])}});
    }
    s["groups"] = groups;
  }
  fs::create_directories(run_dir / "report");
  write_text(run_dir / "report" / "summary.json", s.dump(2) + "\n");

  log << history.size() << " trials in " << rows.size() << " batches\n";
  log << "best " << fmt(best.score) << " at trial " << best.index << " (finger_number "
      << choice_or(best.point, "finger_number") << ", finger_code " << choice_or(best.point, "finger_code")
      << ", thumb_code " << choice_or(best.point, "thumb_code") << ")\n";
  log << "best-so-far curve " << (monotone ? "non-decreasing" : "DECREASES") << '\n';
  log << "top decile: " << dec.size << " designs, " << fmt(dec.three_finger_fraction) << " three-finger\n";
  if (s.contains("groups")) {
    for (const auto& g : s["groups"]) {
      log << "  " << g["group"].get<std::string>() << ' ' << fmt(g["importance"].get<double>()) << '\n';
    }
  }
  log << "wrote " << (run_dir / "report" / "summary.json").string() << '\n';
}

}  // namespace handco
