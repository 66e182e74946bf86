#ifndef JACRL_HARNESS_PLAN_HPP_
#define JACRL_HARNESS_PLAN_HPP_

#include <optional>
#include <string>
#include <vector>

#include "jacrl/env/metrics.hpp"
#include "jacrl/rl/trainer.hpp"

namespace jacrl::harness {

// One experiment: which policy mode, which scene, which conditions to
// train/evaluate, and the budgets. Loaded from a jacrl.plan.v1 JSON file.
struct ExperimentPlan {
  std::string name = "run";
  env::PolicyMode mode = env::PolicyMode::Baseline;
  std::string scene_config_path;
  std::vector<uint64_t> seeds = {1};
  int64_t train_steps = 100000;
  int eval_episodes = 100;

  std::vector<double> ym_list = {15000.0};
  std::vector<double> peristalsis_scales = {1.0};

  bool ym_randomize = false;
  double ym_low = 10000.0, ym_high = 25000.0;

  // Optimizer passthrough (defaults match the policy optimizer).
  double lr = 3e-4;
  int rollout_len = 2048;
  int n_envs = 8;
  int max_macro_steps = 100;

  std::string raw_json;

  void validate() const;
};

ExperimentPlan load_plan(const std::string& path);
ExperimentPlan parse_plan(const std::string& json_text, const std::string& origin);

// One table row mirroring the evaluation tables: policy, YM, SR [%],
// AE [mm], NS, TL [mm] (plus context columns in the CSV).
struct ResultRow {
  std::string policy;
  std::string scene;
  double ym = 15000.0;
  double peristalsis_scale = 1.0;
  env::MetricsRow metrics;
  uint64_t seed = 0;
  std::string branch;  // "", "UB" or "LB"
};

struct ResultsTable {
  std::vector<ResultRow> rows;

  std::string human_readable() const;
  void write_csv(const std::string& path) const;
  static ResultsTable read_csv(const std::string& path);
};

// First env-step at which the 20k-step trailing moving average of episode
// reward reaches 95% of the final plateau (mean moving average over the
// last quarter of training). Throws IncompleteRun on an empty curve.
int64_t convergence_step(const std::vector<rl::CurvePoint>& curve);

struct ComparisonReport {
  // convergence_step(reference) / convergence_step(candidate): > 1 means the
  // candidate converged faster.
  double convergence_ratio = 1.0;
  // candidate NS / reference NS over matching eval conditions: < 1 means the
  // candidate navigates with fewer steps.
  std::optional<double> ns_ratio;
  // candidate SR - reference SR per condition, keyed "ym=...,ps=...".
  std::vector<std::pair<std::string, double>> sr_deltas;
  int64_t candidate_convergence = 0;
  int64_t reference_convergence = 0;
};

}  // namespace jacrl::harness

#endif  // JACRL_HARNESS_PLAN_HPP_
