#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "jacrl/harness/plan.hpp"

namespace jacrl::harness {

namespace {
using nlohmann::json;
}

void ExperimentPlan::validate() const {
  if (name.empty()) throw ConfigError("plan: name must not be empty");
  if (scene_config_path.empty()) throw ConfigError("plan: scene_config is required");
  if (seeds.empty()) throw ConfigError("plan: at least one seed");
  if (train_steps < 0) throw ConfigError("plan: train_steps must be >= 0");
  if (eval_episodes <= 0) throw ConfigError("plan: eval_episodes must be > 0");
  if (ym_list.empty()) throw ConfigError("plan: ym_list must not be empty");
  if (peristalsis_scales.empty()) throw ConfigError("plan: peristalsis_scales empty");
  if (ym_randomize && ym_low >= ym_high) throw ConfigError("plan: ym range inverted");
}

ExperimentPlan parse_plan(const std::string& json_text, const std::string& origin) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  if (root.value("schema", "") != "jacrl.plan.v1") {
    throw ConfigError(origin + ": unsupported plan schema (expected jacrl.plan.v1)");
  }
  ExperimentPlan p;
  p.raw_json = json_text;
  p.name = root.value("name", p.name);
  const std::string mode = root.value("mode", "baseline");
  if (mode == "baseline") {
    p.mode = env::PolicyMode::Baseline;
  } else if (mode == "jacaug") {
    p.mode = env::PolicyMode::JacobianAugmented;
  } else {
    throw ConfigError(origin + ".mode: unknown mode '" + mode + "'");
  }
  if (!root.contains("scene_config")) throw ConfigError(origin + ": missing scene_config");
  p.scene_config_path = root.at("scene_config").get<std::string>();
  if (root.contains("seeds")) p.seeds = root.at("seeds").get<std::vector<uint64_t>>();
  p.train_steps = root.value("train_steps", p.train_steps);
  p.eval_episodes = root.value("eval_episodes", p.eval_episodes);
  if (root.contains("ym_list")) p.ym_list = root.at("ym_list").get<std::vector<double>>();
  if (root.contains("peristalsis_scales")) {
    p.peristalsis_scales = root.at("peristalsis_scales").get<std::vector<double>>();
  }
  if (root.contains("train_ym")) {
    const json& t = root.at("train_ym");
    p.ym_randomize = t.value("randomize", false);
    p.ym_low = t.value("low", p.ym_low);
    p.ym_high = t.value("high", p.ym_high);
  }
  p.lr = root.value("lr", p.lr);
  p.rollout_len = root.value("rollout_len", p.rollout_len);
  p.n_envs = root.value("n_envs", p.n_envs);
  p.max_macro_steps = root.value("max_macro_steps", p.max_macro_steps);
  p.validate();
  return p;
}

ExperimentPlan load_plan(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open plan: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_plan(buf.str(), path);
}

std::string ResultsTable::human_readable() const {
  std::ostringstream out;
  out << "Policy      YM      SR [%]  AE [mm]  NS      TL [mm]\n";
  for (const auto& r : rows) {
    char line[160];
    std::string policy = r.policy;
    if (!r.branch.empty()) policy += "/" + r.branch;
    std::snprintf(line, sizeof(line), "%-10s  %-6.0f  %-6.1f  %-7.2f  ", policy.c_str(),
                  r.ym, r.metrics.sr_percent, r.metrics.ae_mm);
    out << line;
    if (r.metrics.ns) {
      std::snprintf(line, sizeof(line), "%-6.1f  ", *r.metrics.ns);
    } else {
      std::snprintf(line, sizeof(line), "%-6s  ", "-");
    }
    out << line;
    if (r.metrics.tl_mm) {
      std::snprintf(line, sizeof(line), "%-7.2f\n", *r.metrics.tl_mm);
    } else {
      std::snprintf(line, sizeof(line), "%-7s\n", "-");
    }
    out << line;
  }
  return out.str();
}

void ResultsTable::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw ValidationError("ResultsTable: cannot write " + path);
  out << "# schema=jacrl.results.v1\n";
  out << "policy,scene,YM,peristalsis_scale,SR,AE,NS,TL,seeds,episodes,branch\n";
  for (const auto& r : rows) {
    char buf[320];
    std::snprintf(buf, sizeof(buf), "%s,%s,%.17g,%.17g,%.17g,%.17g,", r.policy.c_str(),
                  r.scene.c_str(), r.ym, r.peristalsis_scale, r.metrics.sr_percent,
                  r.metrics.ae_mm);
    out << buf;
    if (r.metrics.ns) {
      std::snprintf(buf, sizeof(buf), "%.17g,", *r.metrics.ns);
    } else {
      std::snprintf(buf, sizeof(buf), ",");
    }
    out << buf;
    if (r.metrics.tl_mm) {
      std::snprintf(buf, sizeof(buf), "%.17g,", *r.metrics.tl_mm);
    } else {
      std::snprintf(buf, sizeof(buf), ",");
    }
    out << buf;
    out << r.seed << "," << r.metrics.episodes << "," << r.branch << "\n";
  }
}

ResultsTable ResultsTable::read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IncompleteRun("ResultsTable: cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line != "# schema=jacrl.results.v1") {
    throw ValidationError("ResultsTable: schema mismatch in " + path);
  }
  std::getline(in, line);  // header
  ResultsTable t;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string field;
    ResultRow r;
    auto next = [&]() {
      if (!std::getline(ss, field, ',')) throw ValidationError("ResultsTable: short row");
      return field;
    };
    r.policy = next();
    r.scene = next();
    r.ym = std::stod(next());
    r.peristalsis_scale = std::stod(next());
    r.metrics.sr_percent = std::stod(next());
    r.metrics.ae_mm = std::stod(next());
    const std::string ns = next();
    if (!ns.empty()) r.metrics.ns = std::stod(ns);
    const std::string tl = next();
    if (!tl.empty()) r.metrics.tl_mm = std::stod(tl);
    r.seed = std::stoull(next());
    r.metrics.episodes = std::stoi(next());
    std::getline(ss, r.branch, ',');
    t.rows.push_back(r);
  }
  return t;
}

int64_t convergence_step(const std::vector<rl::CurvePoint>& curve) {
  if (curve.empty()) throw IncompleteRun("convergence_step: empty curve");

  // Trailing 20k-env-step moving average of episode reward.
  std::vector<double> ma(curve.size());
  for (size_t i = 0; i < curve.size(); ++i) {
    const int64_t lo = curve[i].env_steps - 20000;
    double acc = 0.0;
    int n = 0;
    for (size_t j = 0; j <= i; ++j) {
      if (curve[j].env_steps > lo) {
        acc += curve[j].ep_reward_mean;
        ++n;
      }
    }
    ma[i] = acc / std::max(1, n);
  }

  // Plateau: mean of the moving average over the last quarter.
  const size_t tail_start = curve.size() - std::max<size_t>(1, curve.size() / 4);
  double plateau = 0.0;
  for (size_t i = tail_start; i < curve.size(); ++i) plateau += ma[i];
  plateau /= (curve.size() - tail_start);

  const double threshold = plateau - 0.05 * std::abs(plateau);
  for (size_t i = 0; i < curve.size(); ++i) {
    if (ma[i] >= threshold) return curve[i].env_steps;
  }
  return curve.back().env_steps;
}

}  // namespace jacrl::harness
