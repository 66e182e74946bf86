#ifndef JACRL_HARNESS_COMMANDS_HPP_
#define JACRL_HARNESS_COMMANDS_HPP_

#include <string>

#include "jacrl/harness/plan.hpp"

namespace jacrl::harness {

// Executes the plan once per seed. Each run gets a self-describing
// subdirectory (config snapshot, plan snapshot, run hash, curves, final
// checkpoint, post-training evaluation table). Refuses to overwrite an
// existing run directory unless force is set.
struct TrainOutput {
  std::vector<std::string> run_dirs;
};
TrainOutput cmd_train(const ExperimentPlan& plan, const std::string& out_root,
                      bool force);

// Deterministic evaluation of one checkpoint over the plan's conditions
// (ym_list x peristalsis_scales). Stomach scenes evaluate on target list B,
// vessel scenes on both branch lists with per-branch rows.
ResultsTable cmd_eval(const std::string& checkpoint_base, const ExperimentPlan& plan,
                      const std::string& out_csv);

// Compares a candidate run directory against a reference run directory.
ComparisonReport cmd_compare(const std::string& run_candidate,
                             const std::string& run_reference,
                             const std::string& out_dir);

// Zero-shot vessel evaluation of a stomach-trained checkpoint, then
// fine-tuning with the plan's budget and re-evaluation. Writes a combined
// per-branch table.
struct TransferOutput {
  ResultsTable zero_shot;
  ResultsTable fine_tuned;
  std::string finetune_dir;
};
TransferOutput cmd_transfer(const std::string& checkpoint_base,
                            const ExperimentPlan& vessel_plan,
                            const std::string& out_root, bool force);

// Runs the oracle test-kit validations; returns the number of failures and
// prints one line per check.
int cmd_oracle_check();

// Persisted-run helpers shared by the commands.
std::string run_hash(const ExperimentPlan& plan, uint64_t seed,
                     const std::string& scene_raw);
std::string run_dir_name(const ExperimentPlan& plan, uint64_t seed);

}  // namespace jacrl::harness

#endif  // JACRL_HARNESS_COMMANDS_HPP_
