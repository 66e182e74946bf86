#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "jacrl/harness/commands.hpp"

namespace {

using namespace jacrl;

int run(int argc, char** argv) {
  CLI::App app{
      "jacrl: tendon-driven continuum robot navigation experiments\n"
      "(baseline PPO vs. Jacobian-probe-augmented PPO)"};
  app.require_subcommand(1);

  std::string config_path, out_path, checkpoint_base;
  std::string candidate_dir, reference_dir;
  uint64_t seed_override = 0;
  bool have_seed = false, force = false, deterministic = true;

  app.add_option("--seed", seed_override, "override the plan's seed list with one seed")
      ->each([&](const std::string&) { have_seed = true; });
  app.add_flag("--force", force, "overwrite existing run directories");
  app.add_flag("--deterministic,!--stochastic-eval", deterministic,
               "deterministic policy at evaluation (default on)");

  auto* train = app.add_subcommand("train", "train one policy per plan seed");
  train->add_option("--config", config_path, "experiment plan JSON")->required();
  train->add_option("--out", out_path, "output root directory")->required();

  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint over plan conditions");
  eval->add_option("--checkpoint", checkpoint_base, "checkpoint base path")->required();
  eval->add_option("--config", config_path, "experiment plan JSON")->required();
  eval->add_option("--out", out_path, "results CSV path")->required();

  auto* compare = app.add_subcommand("compare", "compare two completed runs");
  compare->add_option("--candidate", candidate_dir, "candidate run directory")->required();
  compare->add_option("--reference", reference_dir, "reference run directory")->required();
  compare->add_option("--out", out_path, "comparison output directory")->required();

  auto* transfer = app.add_subcommand(
      "transfer", "vessel zero-shot evaluation plus fine-tuning of a checkpoint");
  transfer->add_option("--checkpoint", checkpoint_base, "stomach-trained checkpoint")
      ->required();
  transfer->add_option("--config", config_path, "vessel plan JSON")->required();
  transfer->add_option("--out", out_path, "output root directory")->required();

  app.add_subcommand("oracle-check", "run the oracle test-kit validations");

  CLI11_PARSE(app, argc, argv);

  auto plan_with_overrides = [&](const std::string& path) {
    harness::ExperimentPlan plan = harness::load_plan(path);
    if (have_seed) plan.seeds = {seed_override};
    return plan;
  };

  if (train->parsed()) {
    const auto out = harness::cmd_train(plan_with_overrides(config_path), out_path, force);
    for (const auto& dir : out.run_dirs) std::printf("run: %s\n", dir.c_str());
    return 0;
  }
  if (eval->parsed()) {
    const auto table =
        harness::cmd_eval(checkpoint_base, plan_with_overrides(config_path), out_path);
    std::printf("%s", table.human_readable().c_str());
    return 0;
  }
  if (compare->parsed()) {
    const auto rep = harness::cmd_compare(candidate_dir, reference_dir, out_path);
    std::printf("convergence_ratio: %.3f (candidate %lld vs reference %lld env steps)\n",
                rep.convergence_ratio,
                static_cast<long long>(rep.candidate_convergence),
                static_cast<long long>(rep.reference_convergence));
    if (rep.ns_ratio) std::printf("ns_ratio: %.3f\n", *rep.ns_ratio);
    for (const auto& [key, delta] : rep.sr_deltas) {
      std::printf("sr_delta[%s]: %+.1f\n", key.c_str(), delta);
    }
    return 0;
  }
  if (transfer->parsed()) {
    const auto out = harness::cmd_transfer(checkpoint_base,
                                           plan_with_overrides(config_path), out_path, force);
    std::printf("zero-shot:\n%s", out.zero_shot.human_readable().c_str());
    std::printf("fine-tuned:\n%s", out.fine_tuned.human_readable().c_str());
    return 0;
  }
  // oracle-check
  const int failures = harness::cmd_oracle_check();
  return failures == 0 ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const jacrl::ValidationError& e) {
    std::fprintf(stderr, "validation error: %s\n", e.what());
    return 2;
  } catch (const jacrl::NumericalError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
