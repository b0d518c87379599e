#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "handco/errors.h"
#include "handco/run.h"

namespace {

// Flags shared by the commands that build a RunConfig.
struct ConfigFlags {
  std::string config_file;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::optional<int> budget;
  std::optional<int> grasp_budget;
  std::optional<int> batch;
  std::optional<int> jobs;
  std::optional<int> k_best;
  std::optional<int> resolution;
  std::optional<std::string> tools;

  void add(CLI::App* app, const std::string& budget_help) {
    app->add_option("--config", config_file, "run configuration JSON");
    app->add_option("--set", sets, "override a config value, e.g. --set wrench.f_max=25")->take_all();
    app->add_option("--seed", seed, "random seed");
    app->add_option("--budget", budget, budget_help);
    app->add_option("--k-best", k_best, "K best grasps averaged per tool");
    app->add_option("--resolution", resolution, "pad grid resolution");
    app->add_option("--tools", tools, "comma-separated tool names or tool JSON files");
  }

  handco::RunConfig resolve(const std::string& budget_key) const {
    nlohmann::json doc = nlohmann::json::object();
    if (!config_file.empty()) doc = nlohmann::json(handco::to_json(handco::load_run_config(config_file)));
    for (const auto& s : sets) handco::apply_override(doc, s);
    if (seed) doc["seed"] = *seed;
    if (budget) doc[budget_key] = *budget;
    if (grasp_budget) doc["grasp_budget"] = *grasp_budget;
    if (batch) doc["batch"] = *batch;
    if (jobs) doc["jobs"] = *jobs;
    if (k_best) doc["k_best"] = *k_best;
    if (resolution) doc["resolution"] = *resolution;
    if (tools) {
      std::vector<std::string> names;
      std::stringstream ss(*tools);
      for (std::string t; std::getline(ss, t, ',');) {
        if (!t.empty()) names.push_back(t);
      }
      doc["tools"] = names;
    }
    handco::RunConfig cfg = handco::run_config_from_json(doc);
    cfg.validate();
    return cfg;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Procedural hand generation, grasp evaluation and design optimization"};
  app.require_subcommand(1);

  handco::GenerateArgs gen;
  std::string gen_design;
  auto* generate = app.add_subcommand("generate", "build and export one hand design");
  generate->add_option("--design", gen_design, "design JSON file");
  generate->add_option("--seed", gen.seed, "sample a design from this seed when no file is given");
  generate->add_option("--resolution", gen.resolution, "pad grid resolution");
  generate->add_option("--out", gen.out, "output directory")->required();

  std::string eval_dir, eval_journal;
  ConfigFlags eval_flags;
  auto* evaluate = app.add_subcommand("evaluate", "grasp-optimize an exported hand on every tool");
  evaluate->add_option("hand_dir", eval_dir, "directory written by generate")->required();
  evaluate->add_option("--journal", eval_journal, "grasp journal path (default <hand_dir>/evaluate.jsonl)");
  eval_flags.add(evaluate, "grasp trials per tool");

  std::string og_dir, og_tool, og_out;
  ConfigFlags og_flags;
  auto* opt_grasp = app.add_subcommand("optimize-grasp", "grasp optimization for one tool");
  opt_grasp->add_option("hand_dir", og_dir, "directory written by generate")->required();
  opt_grasp->add_option("--tool", og_tool, "tool name or tool JSON file")->required();
  opt_grasp->add_option("--out", og_out, "output directory (default <hand_dir>/grasp_<tool>)");
  og_flags.add(opt_grasp, "grasp trials");

  std::string oh_out = "runs/default";
  bool oh_resume = false;
  int oh_stop = -1;
  ConfigFlags oh_flags;
  auto* opt_hand = app.add_subcommand("optimize-hand", "outer hand-design optimization");
  opt_hand->add_option("--out", oh_out, "run directory");
  opt_hand->add_flag("--resume", oh_resume, "continue the journal in the run directory");
  opt_hand->add_option("--stop-after", oh_stop, "stop after this many new trials")->group("");
  opt_hand->add_option("--grasp-budget", oh_flags.grasp_budget, "grasp trials per tool and design");
  opt_hand->add_option("--batch", oh_flags.batch, "designs proposed per batch");
  opt_hand->add_option("--jobs", oh_flags.jobs, "parallel evaluations within a batch");
  oh_flags.add(opt_hand, "hand designs to evaluate");

  handco::AnalyzeArgs an;
  auto* analyze = app.add_subcommand("analyze", "surrogate forest and SHAP importance for a run");
  analyze->add_option("run_dir", an.run_dir, "run directory")->required();
  analyze->add_option("--jobs", an.jobs, "threads");

  std::string rep_dir;
  auto* report = app.add_subcommand("report", "summarize a run");
  report->add_option("run_dir", rep_dir, "run directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (generate->parsed()) {
      gen.design_file = gen_design;
      handco::cmd_generate(gen, std::cout);
    } else if (evaluate->parsed()) {
      handco::EvaluateArgs a;
      a.hand_dir = eval_dir;
      a.journal = eval_journal;
      a.config = eval_flags.resolve("grasp_budget");
      handco::cmd_evaluate(a, std::cout);
    } else if (opt_grasp->parsed()) {
      handco::OptimizeGraspArgs a;
      a.hand_dir = og_dir;
      a.tool = og_tool;
      a.out = og_out;
      a.config = og_flags.resolve("grasp_budget");
      handco::cmd_optimize_grasp(a, std::cout);
    } else if (opt_hand->parsed()) {
      handco::OptimizeHandArgs a;
      a.run_dir = oh_out;
      a.resume = oh_resume;
      a.stop_after = oh_stop;
      a.config = oh_flags.resolve("hand_budget");
      handco::cmd_optimize_hand(a, std::cout);
    } else if (analyze->parsed()) {
      handco::cmd_analyze(an, std::cout);
    } else if (report->parsed()) {
      handco::cmd_report(rep_dir, std::cout);
    }
  } catch (const handco::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const handco::InvariantViolation& e) {
    std::cerr << "invariant violation: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
