#include "jacrl/rl/checkpoint.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace jacrl::rl {

namespace {

// FNV-1a over the raw config text.
uint64_t fnv1a(const std::string& s) {
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string config_hash_hex(const std::string& raw_config) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a(raw_config)));
  return buf;
}

void save_checkpoint(const std::string& base, const PolicyValueNet& net,
                     const RunningNormalizer& norm, env::PolicyMode mode,
                     const std::string& config_hash) {
  const auto layout = net.tensor_layout();

  std::ofstream man(base + ".manifest");
  if (!man) throw ValidationError("save_checkpoint: cannot write " + base + ".manifest");
  man << "schema: jacrl.checkpoint.v1\n";
  man << "mode: " << env::to_string(mode) << "\n";
  man << "input_dim: " << net.input_dim() << "\n";
  man << "hidden:";
  for (int h : net.hidden()) man << " " << h;
  man << "\n";
  man << "config_hash: " << config_hash << "\n";
  man << "normalizer_count: " << fmt_double(norm.count()) << "\n";
  man << "normalizer_mean:";
  for (int i = 0; i < norm.dim(); ++i) man << " " << fmt_double(norm.mean()[i]);
  man << "\n";
  man << "normalizer_m2:";
  for (int i = 0; i < norm.dim(); ++i) man << " " << fmt_double(norm.m2()[i]);
  man << "\n";
  man << "tensors:\n";
  int64_t offset = 0;
  for (const auto& t : layout) {
    man << "  " << t.name << " " << t.rows << " " << t.cols << " " << offset << "\n";
    offset += int64_t(t.rows) * t.cols * 4;
  }

  std::ofstream bin(base + ".bin", std::ios::binary);
  if (!bin) throw ValidationError("save_checkpoint: cannot write " + base + ".bin");
  for (const auto& t : layout) {
    for (int i = 0; i < t.rows * t.cols; ++i) {
      const float f = static_cast<float>(net.params()[t.offset + i]);
      bin.write(reinterpret_cast<const char*>(&f), sizeof(float));
    }
  }
}

Checkpoint load_checkpoint(const std::string& base) {
  std::ifstream man(base + ".manifest");
  if (!man) throw CheckpointMismatch("load_checkpoint: missing " + base + ".manifest");

  Checkpoint c;
  std::string line;
  std::vector<std::tuple<std::string, int, int, int64_t>> tensors;
  while (std::getline(man, line)) {
    std::istringstream ss(line);
    std::string key;
    ss >> key;
    if (key == "schema:") {
      std::string v;
      ss >> v;
      if (v != "jacrl.checkpoint.v1") {
        throw CheckpointMismatch("load_checkpoint: unsupported schema " + v);
      }
    } else if (key == "mode:") {
      std::string v;
      ss >> v;
      if (v == "baseline") {
        c.mode = env::PolicyMode::Baseline;
      } else if (v == "jacaug") {
        c.mode = env::PolicyMode::JacobianAugmented;
      } else {
        throw CheckpointMismatch("load_checkpoint: unknown mode " + v);
      }
    } else if (key == "input_dim:") {
      ss >> c.input_dim;
    } else if (key == "hidden:") {
      c.hidden.clear();
      int h;
      while (ss >> h) c.hidden.push_back(h);
    } else if (key == "config_hash:") {
      ss >> c.config_hash;
    } else if (key == "normalizer_count:") {
      ss >> c.norm_count;
    } else if (key == "normalizer_mean:" || key == "normalizer_m2:") {
      std::vector<double> v;
      double x;
      while (ss >> x) v.push_back(x);
      Eigen::VectorXd vec = Eigen::Map<Eigen::VectorXd>(v.data(), v.size());
      (key == "normalizer_mean:" ? c.norm_mean : c.norm_m2) = vec;
    } else if (key == "tensors:") {
      std::string name;
      int rows, cols;
      int64_t off;
      while (man >> name >> rows >> cols >> off) tensors.emplace_back(name, rows, cols, off);
    }
  }
  if (c.norm_mean.size() != c.input_dim || c.norm_m2.size() != c.input_dim) {
    throw CheckpointMismatch("load_checkpoint: normalizer stats have wrong size");
  }

  // Rebuild the parameter vector through the net's own layout.
  PolicyValueNet probe(c.input_dim, c.hidden, /*init_seed=*/0);
  const auto layout = probe.tensor_layout();
  if (layout.size() != tensors.size()) {
    throw CheckpointMismatch("load_checkpoint: tensor table size mismatch");
  }

  std::ifstream bin(base + ".bin", std::ios::binary);
  if (!bin) throw CheckpointMismatch("load_checkpoint: missing " + base + ".bin");
  c.params = Eigen::VectorXd::Zero(probe.param_count());
  for (size_t i = 0; i < layout.size(); ++i) {
    const auto& [name, rows, cols, off] = tensors[i];
    if (name != layout[i].name || rows != layout[i].rows || cols != layout[i].cols) {
      throw CheckpointMismatch("load_checkpoint: tensor layout mismatch at " + name);
    }
    bin.seekg(off);
    for (int k = 0; k < rows * cols; ++k) {
      float f;
      bin.read(reinterpret_cast<char*>(&f), sizeof(float));
      if (!bin) throw CheckpointMismatch("load_checkpoint: truncated tensor data");
      c.params[layout[i].offset + k] = static_cast<double>(f);
    }
  }
  return c;
}

std::pair<PolicyValueNet, RunningNormalizer> instantiate(const Checkpoint& c) {
  PolicyValueNet net(c.input_dim, c.hidden, /*init_seed=*/0);
  net.params() = c.params;
  RunningNormalizer norm(c.input_dim);
  norm.restore(c.norm_count, c.norm_mean, c.norm_m2);
  return {std::move(net), std::move(norm)};
}

}  // namespace jacrl::rl
