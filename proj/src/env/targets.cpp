#include "jacrl/env/targets.hpp"

#include "jacrl/errors.hpp"
#include "jacrl/sim/geometry.hpp"

namespace jacrl::env {

std::string to_string(TargetListId id) {
  switch (id) {
    case TargetListId::A: return "A";
    case TargetListId::B: return "B";
    case TargetListId::VesselUB: return "VesselUB";
    case TargetListId::VesselLB: return "VesselLB";
  }
  return "?";
}

namespace {

Eigen::Vector2d sample_in_polygon(const sim::Polygon& poly, Rng& rng) {
  double xmin = 1e18, xmax = -1e18, ymin = 1e18, ymax = -1e18;
  for (const auto& p : poly) {
    xmin = std::min(xmin, p.x());
    xmax = std::max(xmax, p.x());
    ymin = std::min(ymin, p.y());
    ymax = std::max(ymax, p.y());
  }
  for (int tries = 0; tries < 100000; ++tries) {
    const Eigen::Vector2d p(rng.uniform(xmin, xmax), rng.uniform(ymin, ymax));
    if (sim::point_in_polygon(poly, p)) return p;
  }
  throw ConfigError("target sampling: region polygon rejects everything");
}

std::vector<Eigen::Vector2d> draw_separated(int count, double min_sep, Rng& rng,
                                            const std::function<Eigen::Vector2d(Rng&)>& draw) {
  std::vector<Eigen::Vector2d> pts;
  int tries = 0;
  while (static_cast<int>(pts.size()) < count) {
    if (++tries > 200000) {
      throw ConfigError("target sampling: cannot satisfy min_separation");
    }
    const Eigen::Vector2d p = draw(rng);
    bool ok = true;
    for (const auto& q : pts) {
      if ((p - q).norm() < min_sep) {
        ok = false;
        break;
      }
    }
    if (ok) pts.push_back(p);
  }
  return pts;
}

}  // namespace

TargetList make_target_list(const sim::SceneConfig& cfg, TargetListId id) {
  TargetList out;
  out.list_id = id;
  out.generator_seed = cfg.targets.generator_seed;
  const int n = cfg.targets.count_per_list;
  Rng rng(cfg.targets.generator_seed);

  if (id == TargetListId::A || id == TargetListId::B) {
    if (cfg.scene.target_region.size() < 3) {
      throw ConfigError("make_target_list: scene has no target region polygon");
    }
    // One stream yields both lists: alternate points go to A and B.
    const auto pts = draw_separated(
        2 * n, cfg.targets.min_separation, rng,
        [&](Rng& r) { return sample_in_polygon(cfg.scene.target_region, r); });
    for (int i = 0; i < 2 * n; ++i) {
      if ((i % 2 == 0) == (id == TargetListId::A)) {
        out.targets.emplace_back(pts[i].x(), pts[i].y(), 0.0);
      }
    }
    return out;
  }

  const bool upper = id == TargetListId::VesselUB;
  const Eigen::Vector2d center =
      upper ? cfg.scene.branch_end_upper : cfg.scene.branch_end_lower;
  if (center.isZero()) {
    throw ConfigError("make_target_list: scene has no branch end geometry");
  }
  // Skip the other branch's stream so UB/LB differ deterministically.
  Rng branch_rng = rng.spawn(upper ? 1 : 2);
  const double radius = cfg.scene.branch_target_radius;
  const auto pts = draw_separated(n, cfg.targets.min_separation, branch_rng,
                                  [&](Rng& r) -> Eigen::Vector2d {
                                    while (true) {
                                      const Eigen::Vector2d p(r.uniform(-radius, radius),
                                                              r.uniform(-radius, radius));
                                      if (p.norm() <= radius) return center + p;
                                    }
                                  });
  for (const auto& p : pts) out.targets.emplace_back(p.x(), p.y(), 0.0);
  return out;
}

Eigen::Vector3d sample_target(const TargetList& list, Rng& rng) {
  if (list.targets.empty()) throw ValidationError("sample_target: empty list");
  return list.targets[rng.uniform_index(list.targets.size())];
}

}  // namespace jacrl::env
