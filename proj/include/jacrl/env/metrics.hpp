#ifndef JACRL_ENV_METRICS_HPP_
#define JACRL_ENV_METRICS_HPP_

#include <optional>
#include <string>
#include <vector>

#include "jacrl/env/episode.hpp"

namespace jacrl::env {

// One table row of the four evaluation metrics. NS and TL aggregate over
// successful episodes only and are absent when nothing succeeded.
struct MetricsRow {
  double sr_percent = 0.0;
  double ae_mm = 0.0;
  std::optional<double> ns;
  std::optional<double> tl_mm;
  int episodes = 0;
};

// Throws EmptyCohort on an empty record list.
MetricsRow aggregate_metrics(const std::vector<EpisodeRecord>& records);

// Newline-delimited structured episode log (one JSON object per episode).
void append_episode_jsonl(const std::string& path, const EpisodeRecord& record,
                          PolicyMode mode, const std::string& scene,
                          uint64_t seed);

// Probe audit CSV: step, condition number, Jacobian norm, restore residual.
void write_probe_audit_csv(const std::string& path,
                           const std::vector<ProbeAudit>& audit);

}  // namespace jacrl::env

#endif  // JACRL_ENV_METRICS_HPP_
