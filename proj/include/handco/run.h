#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "handco/shap.h"
#include "handco/grasp.h"
#include "handco/hand_model.h"
#include "handco/journal.h"
#include "handco/tools.h"
#include "handco/urdf.h"

namespace handco {

struct RunConfig {
  std::string space;  // design-space JSON file; empty selects the built-in space
  std::vector<std::string> tools = {"hammer", "spoon", "knife"};  // built-in names or tool JSON files
  int k_best = 3;
  int grasp_budget = 60;
  int hand_budget = 200;
  int batch = 4;
  int jobs = 1;
  int resolution = 16;
  std::uint64_t seed = 0;
  int top_n = 5;
  GraspSettings grasp;
  TpeConfig hand_tpe;
  ForestConfig forest;
  std::uint64_t analysis_seed = 0;

  /// Throws ConfigError on out-of-range values or missing files.
  void validate() const;
};

nlohmann::json to_json(const RunConfig& cfg);
RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);

/// Applies "a.b.c=value" overrides to a config document. The value is parsed
/// as JSON when possible and taken as a string otherwise. Unknown keys are a
/// ConfigError.
void apply_override(nlohmann::json& doc, const std::string& assignment);

/// The config with the fields that may legitimately change on resume (jobs,
/// hand_budget) removed. Two runs with equal identities share a journal.
nlohmann::json resume_identity(const RunConfig& cfg);

DesignSpace load_space(const RunConfig& cfg);
std::vector<ToolModel> load_tools(const RunConfig& cfg);
HandOptions hand_options(const RunConfig& cfg);

struct ToolEvaluation {
  std::string tool;
  GraspSearch search;
};

struct HandEvaluation {
  bool feasible = false;
  std::string reason;
  double score = 0.0;  // S_h
  std::vector<ToolEvaluation> tools;
};

std::uint64_t tool_seed(std::uint64_t seed, std::size_t tool_index);

/// Grasp optimization on every tool, then S_h over the K best grasps of each.
/// An infeasible hand scores 0 without running grasps.
HandEvaluation evaluate_hand(const HandModel& hand, const std::vector<ToolModel>& tools, const RunConfig& cfg,
                             std::uint64_t seed);

/// S_h recomputed from grasp journal lines tagged with info.tool.
double hand_score_from_journal(const std::vector<TrialRecord>& grasp_trials, int k);

/// Assembles and exports one design (design.json, hand.urdf, meshes/). The
/// directory is built under a sibling staging path and moved into place only
/// when complete.
ExportResult export_design(const DesignPoint& point, const HandOptions& opts, const std::filesystem::path& dir);

struct CurveRow {
  int iteration = 0;  // batch index
  int trials = 0;     // cumulative
  double batch_mean = 0.0;
  double best_so_far = 0.0;
};
std::vector<CurveRow> curve_rows(const std::vector<TrialRecord>& history);
void write_curve_csv(const std::filesystem::path& path, const std::vector<CurveRow>& rows);

// Commands. Each writes its human-readable summary to `log`.
struct GenerateArgs {
  std::filesystem::path design_file;  // empty: sample from the seed
  std::uint64_t seed = 0;
  int resolution = 16;
  std::filesystem::path out;
};
ExportResult cmd_generate(const GenerateArgs& args, std::ostream& log);

struct EvaluateArgs {
  std::filesystem::path hand_dir;
  RunConfig config;
  std::filesystem::path journal;  // default <hand_dir>/evaluate.jsonl
};
HandEvaluation cmd_evaluate(const EvaluateArgs& args, std::ostream& log);

struct OptimizeGraspArgs {
  std::filesystem::path hand_dir;
  std::string tool;
  RunConfig config;
  std::filesystem::path out;  // directory for grasps.jsonl and best_grasp.json
};
GraspSearch cmd_optimize_grasp(const OptimizeGraspArgs& args, std::ostream& log);

struct OptimizeHandArgs {
  RunConfig config;
  std::filesystem::path run_dir;
  bool resume = false;
  /// Stop after this many new evaluations (simulates an interruption); < 0
  /// runs to the budget.
  int stop_after = -1;
};
OptimizeResult cmd_optimize_hand(const OptimizeHandArgs& args, std::ostream& log);

struct AnalyzeArgs {
  std::filesystem::path run_dir;
  int jobs = 1;
};
ImportanceTable cmd_analyze(const AnalyzeArgs& args, std::ostream& log);

struct DecileSummary {
  std::size_t size = 0;
  double three_finger_fraction = 0.0;
};
/// Top 10% of the trials by score (at least one; ties favour earlier trials).
DecileSummary top_decile(const std::vector<TrialRecord>& history);

/// Writes report/summary.json.
void cmd_report(const std::filesystem::path& run_dir, std::ostream& log);

}  // namespace handco
