#include "jacrl/sim/simulator.hpp"

#include <cmath>
#include <cstring>

#include "jacrl/errors.hpp"
#include "jacrl/rng.hpp"

namespace jacrl::sim {

namespace {

// Substeps on which collision detection runs (6 of 10 per macro-step).
constexpr bool kDetectSubstep[kSubstepsPerMacro] = {
    true, false, true, false, true, false, true, false, true, true};

// Relative-velocity damping along the backbone axis.
constexpr double kAxialDamping = 0.25;

// Penetration below this depth does not raise the contact flag.
constexpr double kContactTolerance = 1e-9;

void append_bytes(std::vector<uint8_t>& out, const void* p, size_t n) {
  const auto* b = static_cast<const uint8_t*>(p);
  out.insert(out.end(), b, b + n);
}

template <typename T>
void read_bytes(const std::vector<uint8_t>& in, size_t& off, T* p, size_t count = 1) {
  std::memcpy(p, in.data() + off, count * sizeof(T));
  off += count * sizeof(T);
}

}  // namespace

std::vector<uint8_t> SimState::serialize() const {
  std::vector<uint8_t> out;
  const uint64_t n_nodes = node_positions.size();
  const uint64_t n_wall = wall_displacement.size();
  append_bytes(out, &n_nodes, sizeof(n_nodes));
  append_bytes(out, &n_wall, sizeof(n_wall));
  auto append_vec3 = [&out](const std::vector<Eigen::Vector3d>& v) {
    for (const auto& x : v) append_bytes(out, x.data(), 3 * sizeof(double));
  };
  append_vec3(node_positions);
  append_vec3(node_velocities);
  append_bytes(out, tendon_displacements.data(), 4 * sizeof(double));
  append_bytes(out, &axial_insertion, sizeof(double));
  append_bytes(out, wall_displacement.data(), n_wall * sizeof(double));
  append_bytes(out, &sim_time, sizeof(double));
  append_bytes(out, &rng_state, sizeof(uint64_t));
  append_bytes(out, &peristalsis_phase, sizeof(double));
  append_bytes(out, &peristalsis_scale, sizeof(double));
  append_vec3(contact_forces);
  append_bytes(out, penetrations.data(), n_nodes * sizeof(double));
  return out;
}

SimState SimState::deserialize(const std::vector<uint8_t>& bytes) {
  SimState s;
  size_t off = 0;
  uint64_t n_nodes = 0, n_wall = 0;
  read_bytes(bytes, off, &n_nodes);
  read_bytes(bytes, off, &n_wall);
  s.node_positions.resize(n_nodes);
  s.node_velocities.resize(n_nodes);
  s.wall_displacement.resize(n_wall);
  s.contact_forces.resize(n_nodes);
  s.penetrations.resize(n_nodes);
  auto read_vec3 = [&bytes, &off](std::vector<Eigen::Vector3d>& v) {
    for (auto& x : v) read_bytes(bytes, off, x.data(), 3);
  };
  read_vec3(s.node_positions);
  read_vec3(s.node_velocities);
  read_bytes(bytes, off, s.tendon_displacements.data(), 4);
  read_bytes(bytes, off, &s.axial_insertion);
  read_bytes(bytes, off, s.wall_displacement.data(), n_wall);
  read_bytes(bytes, off, &s.sim_time);
  read_bytes(bytes, off, &s.rng_state);
  read_bytes(bytes, off, &s.peristalsis_phase);
  read_bytes(bytes, off, &s.peristalsis_scale);
  read_vec3(s.contact_forces);
  read_bytes(bytes, off, s.penetrations.data(), n_nodes);
  return s;
}

Simulator::Simulator(RobotModel model, LumenScene scene)
    : model_(std::move(model)), scene_(std::move(scene)) {
  model_.validate();
  if (scene_.arclengths.empty()) scene_.finalize();
}

Eigen::Vector3d Simulator::base_anchor(double insertion) const {
  Eigen::Vector3d entry(scene_.entry_point.x(), scene_.entry_point.y(), 0.0);
  return entry + insertion * scene_.entry_axis();
}

SimState Simulator::reset(uint64_t seed, double peristalsis_scale) const {
  SimState s;
  const int n_nodes = model_.num_nodes();
  s.node_positions.resize(n_nodes);
  s.node_velocities.assign(n_nodes, Eigen::Vector3d::Zero());
  s.contact_forces.assign(n_nodes, Eigen::Vector3d::Zero());
  s.penetrations.assign(n_nodes, 0.0);
  s.wall_displacement.assign(scene_.wall_rest.size(), 0.0);
  s.peristalsis_scale = peristalsis_scale;

  Rng rng(seed);
  s.peristalsis_phase = rng.uniform(0.0, 2.0 * M_PI);
  s.rng_state = rng.next_u64();

  const Eigen::Vector3d axis = scene_.entry_axis();
  const Eigen::Vector3d anchor = base_anchor(0.0);
  for (int i = 0; i < n_nodes; ++i) {
    s.node_positions[i] = anchor + (i * model_.segment_length) * axis;
  }

  detect_contacts(s);
  for (int i = 1; i < n_nodes; ++i) {
    if (s.penetrations[i] > 0.0) {
      throw GeometryError("reset: initial pose penetrates the wall at node " +
                          std::to_string(i));
    }
  }
  return s;
}

void Simulator::detect_contacts(SimState& s) const {
  const Polygon wall = scene_.displaced_wall(s.sim_time, s.peristalsis_phase,
                                             s.peristalsis_scale);
  for (size_t v = 0; v < wall.size(); ++v) {
    s.wall_displacement[v] =
        scene_.vertex_offset(v, s.sim_time, s.peristalsis_phase, s.peristalsis_scale);
  }
  const double radius = model_.cross_section_radius;
  const int n_nodes = model_.num_nodes();
  for (int i = 0; i < n_nodes; ++i) {
    s.contact_forces[i].setZero();
    s.penetrations[i] = 0.0;
    if (i == 0) continue;  // base node is kinematic
    const Eigen::Vector2d p(s.node_positions[i].x(), s.node_positions[i].y());
    const WallQuery q = wall_query(wall, p);
    const double pen = radius - q.signed_distance;
    if (pen > 0.0) {
      s.penetrations[i] = pen;
      const Eigen::Vector2d f = scene_.wall_stiffness * pen * q.inward_normal;
      s.contact_forces[i] = Eigen::Vector3d(f.x(), f.y(), 0.0);
    }
  }
}

void Simulator::accumulate_forces(const SimState& s,
                                  std::vector<Eigen::Vector3d>& force) const {
  const int n_nodes = model_.num_nodes();
  const int n_seg = model_.num_segments;
  const double seg_len = model_.segment_length;
  force.assign(n_nodes, Eigen::Vector3d::Zero());

  const Eigen::Vector3d axis = scene_.entry_axis();
  const Eigen::Vector3d ghost = s.node_positions[0] - seg_len * axis;

  auto node_pos = [&](int i) -> Eigen::Vector3d {
    return i < 0 ? ghost : s.node_positions[i];
  };
  auto node_vel = [&](int i) -> Eigen::Vector3d {
    return i < 0 ? s.node_velocities[0] : s.node_velocities[i];
  };

  // Axial springs with along-axis damping.
  for (int i = 0; i < n_seg; ++i) {
    const Eigen::Vector3d e = s.node_positions[i + 1] - s.node_positions[i];
    const double len = e.norm();
    if (len < 1e-9) continue;
    const Eigen::Vector3d dir = e / len;
    const double stretch = len - seg_len;
    const double rel_v = (node_vel(i + 1) - node_vel(i)).dot(dir);
    const double mag = model_.axial_stiffness * stretch + kAxialDamping * rel_v;
    force[i + 1] -= mag * dir;
    force[i] += mag * dir;
  }

  // Bending: energy k_joint * (1 - cos theta) at every joint, the base joint
  // referenced against a ghost node that clamps the entry tangent.
  const double k_joint = model_.joint_stiffness();
  for (int j = 0; j < n_seg; ++j) {
    const Eigen::Vector3d e1 = node_pos(j) - node_pos(j - 1);
    const Eigen::Vector3d e2 = node_pos(j + 1) - node_pos(j);
    const double l1 = e1.norm(), l2 = e2.norm();
    if (l1 < 1e-9 || l2 < 1e-9) continue;
    const Eigen::Vector3d a = e1 / l1;
    const Eigen::Vector3d b = e2 / l2;
    const double c = a.dot(b);
    const Eigen::Vector3d dc_de1 = (b - c * a) / l1;
    const Eigen::Vector3d dc_de2 = (a - c * b) / l2;
    // F_i = -dE/dp_i = k_joint * dcos/dp_i
    if (j - 1 >= 0) force[j - 1] += k_joint * (-dc_de1);
    force[j] += k_joint * (dc_de1 - dc_de2);
    force[j + 1] += k_joint * dc_de2;
  }

  // Tendon moments as force couples on the actuated proximal segments.
  const int n_act = model_.actuated_segments();
  const Eigen::Vector3d u_plane(-std::sin(scene_.entry_angle),
                                std::cos(scene_.entry_angle), 0.0);
  const Eigen::Vector3d u_out(0.0, 0.0, 1.0);
  const Eigen::Vector3d cable_dirs[kNumTendons] = {u_plane, -u_plane, u_out, -u_out};
  for (int j = 0; j < n_act; ++j) {
    const Eigen::Vector3d e = s.node_positions[j + 1] - s.node_positions[j];
    const double len2 = e.squaredNorm();
    if (len2 < 1e-12) continue;
    const Eigen::Vector3d t_hat = e / std::sqrt(len2);
    Eigen::Vector3d torque = Eigen::Vector3d::Zero();
    for (int c = 0; c < kNumTendons; ++c) {
      const double tension = model_.tendon_gain * s.tendon_displacements[c];
      torque += tension * model_.tendon_offsets[c] * t_hat.cross(cable_dirs[c]);
    }
    const Eigen::Vector3d f = torque.cross(e) / len2;
    force[j + 1] += f;
    force[j] -= f;
  }

  // Per-node drag, soft out-of-plane confinement, held contact forces.
  for (int i = 1; i < n_nodes; ++i) {
    force[i] -= model_.damping * s.node_velocities[i];
    force[i].z() -= model_.plane_stiffness * s.node_positions[i].z();
    force[i] += s.contact_forces[i];
  }
}

void Simulator::integrate_substep(SimState& s, double tendon_rate[kNumTendons],
                                  double axial_rate, bool detect) const {
  // Actuators move first, then the anchor, then the elastic response.
  for (int c = 0; c < kNumTendons; ++c) s.tendon_displacements[c] += tendon_rate[c];
  s.axial_insertion += axial_rate;

  const Eigen::Vector3d axis = scene_.entry_axis();
  s.node_positions[0] = base_anchor(s.axial_insertion);
  s.node_velocities[0] = (axial_rate / kSubstepDt) * axis;

  if (detect) detect_contacts(s);

  static thread_local std::vector<Eigen::Vector3d> force;
  accumulate_forces(s, force);

  const double inv_m = 1.0 / model_.node_mass;
  const int n_nodes = model_.num_nodes();
  for (int i = 1; i < n_nodes; ++i) {
    s.node_velocities[i] += kSubstepDt * inv_m * force[i];
    s.node_positions[i] += kSubstepDt * s.node_velocities[i];
  }
}

void Simulator::check_finite(const SimState& s) const {
  for (const auto& p : s.node_positions) {
    for (int k = 0; k < 3; ++k) {
      if (!std::isfinite(p[k]) || std::abs(p[k]) > 1e6) {
        throw NumericalBlowup("simulator state left the admissible region");
      }
    }
  }
  for (const auto& v : s.node_velocities) {
    for (int k = 0; k < 3; ++k) {
      if (!std::isfinite(v[k]) || std::abs(v[k]) > 1e6) {
        throw NumericalBlowup("simulator velocity left the admissible region");
      }
    }
  }
}

SimState Simulator::step(const SimState& state, const ActionVector& action) const {
  SimState s = state;

  double tendon_rate[kNumTendons];
  for (int c = 0; c < kNumTendons; ++c) {
    const double target = std::clamp(s.tendon_displacements[c] + action.tendon(c),
                                     -model_.max_tendon_travel, model_.max_tendon_travel);
    tendon_rate[c] = (target - s.tendon_displacements[c]) / kSubstepsPerMacro;
  }
  const double axial_target =
      std::clamp(s.axial_insertion + action.axial(), 0.0, model_.max_insertion);
  const double axial_rate = (axial_target - s.axial_insertion) / kSubstepsPerMacro;

  for (int sub = 0; sub < kSubstepsPerMacro; ++sub) {
    integrate_substep(s, tendon_rate, axial_rate, kDetectSubstep[sub]);
    s.sim_time += kSubstepDt;
  }
  check_finite(s);
  return s;
}

SimState Simulator::probe_substep(const SimState& state,
                                  const std::array<double, kActionDim>& delta,
                                  bool skip_collision) const {
  SimState s = state;
  double tendon_rate[kNumTendons];
  for (int c = 0; c < kNumTendons; ++c) tendon_rate[c] = delta[c];
  // sim_time stays frozen: probes run between control ticks.
  integrate_substep(s, tendon_rate, delta[kNumTendons], !skip_collision);
  check_finite(s);
  return s;
}

bool Simulator::probe_within_limits(const SimState& state,
                                    const std::array<double, kActionDim>& delta) const {
  for (int c = 0; c < kNumTendons; ++c) {
    const double v = state.tendon_displacements[c] + delta[c];
    if (std::abs(v) > model_.max_tendon_travel) return false;
  }
  const double ins = state.axial_insertion + delta[kNumTendons];
  return ins >= 0.0 && ins <= model_.max_insertion;
}

Observation Simulator::observe(const SimState& state,
                               const ActionVector& prev_action) const {
  Observation o = Observation::Zero();
  const int n_nodes = model_.num_nodes();
  o.segment<3>(0) = state.node_positions[n_nodes - 1];
  o.segment<3>(3) = state.node_velocities[n_nodes - 1];
  for (int i = 0; i < kActionDim; ++i) o[6 + i] = prev_action[i];

  Eigen::Vector3d net = Eigen::Vector3d::Zero();
  bool contact = false;
  for (int i = n_nodes - 3; i < n_nodes; ++i) {
    net += state.contact_forces[i];
    if (state.penetrations[i] > kContactTolerance) contact = true;
  }
  o.segment<3>(11) = net;
  o[14] = contact ? 1.0 : 0.0;
  return o;
}

bool Simulator::in_contact(const SimState& state) const {
  for (size_t i = 1; i < state.penetrations.size(); ++i) {
    if (state.penetrations[i] > kContactTolerance) return true;
  }
  return false;
}

}  // namespace jacrl::sim
