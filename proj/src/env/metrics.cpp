#include "jacrl/env/metrics.hpp"

#include <fstream>

#include <json.hpp>

#include "jacrl/errors.hpp"

namespace jacrl::env {

MetricsRow aggregate_metrics(const std::vector<EpisodeRecord>& records) {
  if (records.empty()) throw EmptyCohort("aggregate_metrics: no episodes");
  MetricsRow row;
  row.episodes = static_cast<int>(records.size());
  int successes = 0;
  double ae = 0.0, ns = 0.0, tl = 0.0;
  for (const auto& r : records) {
    ae += r.final_error;
    if (r.success) {
      ++successes;
      ns += r.nav_steps;
      tl += r.trajectory_length;
    }
  }
  row.sr_percent = 100.0 * successes / records.size();
  row.ae_mm = ae / records.size();
  if (successes > 0) {
    row.ns = ns / successes;
    row.tl_mm = tl / successes;
  }
  return row;
}

void append_episode_jsonl(const std::string& path, const EpisodeRecord& r,
                          PolicyMode mode, const std::string& scene,
                          uint64_t seed) {
  nlohmann::json j;
  j["schema"] = "jacrl.episode.v1";
  j["policy"] = to_string(mode);
  j["scene"] = scene;
  j["seed"] = seed;
  j["success"] = r.success;
  j["final_error_mm"] = r.final_error;
  j["nav_steps"] = r.nav_steps;
  j["trajectory_length_mm"] = r.trajectory_length;
  j["reward_sum"] = r.reward_sum;
  j["probe_path_mm"] = r.probe_path;
  j["blowup"] = r.blowup;
  j["target"] = {r.target.x(), r.target.y(), r.target.z()};
  std::ofstream out(path, std::ios::app);
  if (!out) throw ValidationError("append_episode_jsonl: cannot open " + path);
  out << j.dump() << "\n";
}

void write_probe_audit_csv(const std::string& path,
                           const std::vector<ProbeAudit>& audit) {
  std::ofstream out(path);
  if (!out) throw ValidationError("write_probe_audit_csv: cannot open " + path);
  out << "# schema=jacrl.probe_audit.v1\n";
  out << "step,condition_number,jacobian_fro_norm,restore_residual_mm\n";
  char buf[160];
  for (const auto& a : audit) {
    std::snprintf(buf, sizeof(buf), "%d,%.9g,%.9g,%.9g\n", a.step,
                  a.condition_number, a.jacobian_norm, a.restore_residual);
    out << buf;
  }
}

}  // namespace jacrl::env
