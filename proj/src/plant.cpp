#include "simcal/plant.hpp"

#include <cmath>

namespace simcal {

namespace {

Eigen::VectorXd default_stand_pose() {
  // hip_x splayed outward per side, hip_y forward, knee folded.
  Eigen::VectorXd q(kNumJoints);
  for (int leg = 0; leg < 4; ++leg) {
    const double side = (leg % 2 == 0) ? 1.0 : -1.0;  // FL/HL left, FR/HR right
    q[3 * leg + 0] = 0.1 * side;
    q[3 * leg + 1] = 0.9;
    q[3 * leg + 2] = -1.5;
  }
  return q;
}

}  // namespace

PlantConfig::PlantConfig() : q_default(default_stand_pose()) {}

void PlantConfig::validate() const {
  if (inertia <= 0) throw ConfigError("plant inertia must be positive");
  if (viscous_damping < 0) throw ConfigError("plant damping must be >= 0");
  if (gravity_torque_amplitude < 0) throw ConfigError("gravity torque amplitude must be >= 0");
  if (q_default.size() != kNumJoints) throw ConfigError("q_default must have 12 entries");
}

PlantConfig PlantConfig::from_config(const Config& cfg, const std::string& prefix) {
  PlantConfig p;
  p.inertia = cfg.get_double(prefix + ".inertia", p.inertia);
  p.viscous_damping = cfg.get_double(prefix + ".viscous_damping", p.viscous_damping);
  p.gravity_torque_amplitude =
      cfg.get_double(prefix + ".gravity_torque_amplitude", p.gravity_torque_amplitude);
  if (cfg.has(prefix + ".q_default")) {
    const auto v = cfg.get_doubles(prefix + ".q_default");
    if (v.size() != kNumJoints) throw ConfigError("q_default must list 12 values");
    p.q_default = Eigen::Map<const Eigen::VectorXd>(v.data(), kNumJoints);
  }
  p.validate();
  return p;
}

void PlantConfig::to_config(Config& cfg, const std::string& prefix) const {
  cfg.set(prefix + ".inertia", inertia);
  cfg.set(prefix + ".viscous_damping", viscous_damping);
  cfg.set(prefix + ".gravity_torque_amplitude", gravity_torque_amplitude);
  std::string pose;
  for (int j = 0; j < kNumJoints; ++j)
    pose += (j ? "," : "") + format_double(q_default[j]);
  cfg.set(prefix + ".q_default", pose);
}

Eigen::VectorXd ScriptedPolicy::action(const CommandSample& cmd, double t) const {
  const double f = base_frequency + frequency_per_mps * std::abs(cmd.v_x);
  const double theta = 2.0 * M_PI * f * t;
  const double norm = std::tanh(wave_sharpness);
  Eigen::VectorXd a = Eigen::VectorXd::Zero(kNumJoints);
  for (int leg = 0; leg < 4; ++leg) {
    // Trot: FL+HR in phase, FR+HL half a cycle later.
    const double leg_phase = (leg == 0 || leg == 3) ? 0.0 : M_PI;
    const double side = (leg % 2 == 0) ? 1.0 : -1.0;
    const double front = (leg < 2) ? 1.0 : -1.0;
    const double swing = std::tanh(wave_sharpness * std::sin(theta + leg_phase)) / norm;
    const double lift = std::tanh(wave_sharpness * std::cos(theta + leg_phase)) / norm;
    a[3 * leg + 0] = (hip_x_amp_per_vy * cmd.v_y + hip_x_amp_per_wz * cmd.omega_z * side) * swing;
    a[3 * leg + 1] = hip_y_amp_per_vx * cmd.v_x * swing;
    a[3 * leg + 2] = knee_amp_per_vx * cmd.v_x * lift * front;
  }
  return a.cwiseMax(-1.0).cwiseMin(1.0);
}

ScriptedPolicy ScriptedPolicy::from_config(const Config& cfg, const std::string& prefix) {
  ScriptedPolicy p;
  p.base_frequency = cfg.get_double(prefix + ".base_frequency", p.base_frequency);
  p.frequency_per_mps = cfg.get_double(prefix + ".frequency_per_mps", p.frequency_per_mps);
  p.knee_amp_per_vx = cfg.get_double(prefix + ".knee_amp_per_vx", p.knee_amp_per_vx);
  p.hip_y_amp_per_vx = cfg.get_double(prefix + ".hip_y_amp_per_vx", p.hip_y_amp_per_vx);
  p.hip_x_amp_per_vy = cfg.get_double(prefix + ".hip_x_amp_per_vy", p.hip_x_amp_per_vy);
  p.hip_x_amp_per_wz = cfg.get_double(prefix + ".hip_x_amp_per_wz", p.hip_x_amp_per_wz);
  p.wave_sharpness = cfg.get_double(prefix + ".wave_sharpness", p.wave_sharpness);
  return p;
}

void ScriptedPolicy::to_config(Config& cfg, const std::string& prefix) const {
  cfg.set(prefix + ".base_frequency", base_frequency);
  cfg.set(prefix + ".frequency_per_mps", frequency_per_mps);
  cfg.set(prefix + ".knee_amp_per_vx", knee_amp_per_vx);
  cfg.set(prefix + ".hip_y_amp_per_vx", hip_y_amp_per_vx);
  cfg.set(prefix + ".hip_x_amp_per_vy", hip_x_amp_per_vy);
  cfg.set(prefix + ".hip_x_amp_per_wz", hip_x_amp_per_wz);
  cfg.set(prefix + ".wave_sharpness", wave_sharpness);
}

PlantState::PlantState(const PlantConfig& config, const GainConfig& gains)
    : q(config.q_default), q_dot(Eigen::VectorXd::Zero(kNumJoints)), delay(gains.delay_steps()) {}

void step(PlantState& state, const Eigen::VectorXd& action, const ActuatorParams& params,
          const GainConfig& gains, const PlantConfig& config,
          const TorquePositionCurve* pos_curve, Eigen::VectorXd* tau_mean_out) {
  if (action.size() != kNumJoints) throw SchemaError("step: action must have 12 entries");
  const int substeps = gains.substeps();
  const double dt = 1.0 / gains.f_torque;
  if (tau_mean_out != nullptr) tau_mean_out->setZero(kNumJoints);
  for (int s = 0; s < substeps; ++s) {
    const Eigen::VectorXd delayed = state.delay.push_pop(action);
    const Eigen::VectorXd tau_cmd =
        pd_torque(delayed, state.q, state.q_dot, config.q_default, gains);
    for (int j = 0; j < kNumJoints; ++j) {
      const double tau_lim =
          apply_limits(tau_cmd[j], state.q[j], state.q_dot[j], params, pos_curve);
      const double friction = friction_torque(state.q_dot[j], params.friction_for_joint(j));
      const double gravity =
          -config.gravity_torque_amplitude * std::sin(state.q[j] - config.q_default[j]);
      const double accel =
          (tau_lim + friction + (-config.viscous_damping * state.q_dot[j]) + gravity) /
          config.inertia;
      state.q_dot[j] += accel * dt;
      state.q[j] += state.q_dot[j] * dt;
      if (!std::isfinite(state.q[j]) || !std::isfinite(state.q_dot[j]))
        throw NumericError("plant state diverged at joint " + std::to_string(j) + ", t=" +
                           format_double(state.t) + ", substep " + std::to_string(s));
      if (tau_mean_out != nullptr) (*tau_mean_out)[j] += tau_lim / substeps;
    }
    state.t += dt;
  }
}

namespace {

Rollout run_rollout(const CommandSequence& seq, const ActuatorParams& params,
                    const GainConfig& gains, const PlantConfig& config,
                    const ScriptedPolicy& policy, Source source, int repeat_index,
                    RngStream init_rng, const NoiseModel* noise, RngStream noise_rng,
                    const TorquePositionCurve* pos_curve) {
  seq.validate();
  gains.validate();
  config.validate();
  params.validate();
  const int n = static_cast<int>(seq.samples.size());

  Rollout r;
  r.sequence_id = seq.id;
  r.source = source;
  r.repeat_index = repeat_index;
  r.dt = 1.0 / seq.f_policy;
  r.t.resize(n);
  r.q.resize(n, kNumJoints);
  r.q_dot.resize(n, kNumJoints);
  r.action.resize(n, kNumJoints);
  r.command.resize(n, 3);
  r.tau.resize(n, kNumJoints);

  PlantState state(config, gains);
  for (int j = 0; j < kNumJoints; ++j) state.q[j] += init_rng.uniform(-0.2, 0.2);

  Eigen::VectorXd tau_mean(kNumJoints);
  for (int k = 0; k < n; ++k) {
    const CommandSample& cmd = seq.samples[k];
    const Eigen::VectorXd a = policy.action(cmd, cmd.t);

    r.t[k] = cmd.t;
    if (noise != nullptr) {
      Eigen::VectorXd obs(2 * kNumJoints);
      obs << state.q, state.q_dot;
      const Eigen::VectorXd corrupted = corrupt(obs, *noise, noise_rng);
      r.q.row(k) = corrupted.head(kNumJoints);
      r.q_dot.row(k) = corrupted.tail(kNumJoints);
    } else {
      r.q.row(k) = state.q;
      r.q_dot.row(k) = state.q_dot;
    }
    r.action.row(k) = a;
    r.command(k, 0) = cmd.v_x;
    r.command(k, 1) = cmd.v_y;
    r.command(k, 2) = cmd.omega_z;

    step(state, a, params, gains, config, pos_curve, &tau_mean);
    r.tau.row(k) = tau_mean;
  }
  return r;
}

}  // namespace

std::vector<Rollout> rollout_sim(const CommandSequence& seq, const ActuatorParams& params,
                                 const GainConfig& gains, const PlantConfig& config,
                                 const ScriptedPolicy& policy, int n_rollouts,
                                 std::uint64_t seed, const TorquePositionCurve* pos_curve) {
  if (n_rollouts < 1) throw ConfigError("rollout_sim: n_rollouts must be >= 1");
  std::vector<Rollout> out;
  out.reserve(n_rollouts);
  for (int i = 0; i < n_rollouts; ++i) {
    RngStream init = RngStream::derive(seed, "plant/sim_init/" + seq.id, i);
    out.push_back(run_rollout(seq, params, gains, config, policy, Source::Simulated, i, init,
                              nullptr, RngStream(0), pos_curve));
  }
  return out;
}

std::vector<Rollout> rollout_synthetic_hardware(
    const CommandSequence& seq, const ActuatorParams& hidden_params, const GainConfig& gains,
    const PlantConfig& config, const ScriptedPolicy& policy, const NoiseModel& noise,
    int n_repeats, std::uint64_t seed, const TorquePositionCurve* pos_curve) {
  if (n_repeats < 1) throw ConfigError("rollout_synthetic_hardware: n_repeats must be >= 1");
  noise.validate();
  std::vector<Rollout> out;
  out.reserve(n_repeats);
  for (int i = 0; i < n_repeats; ++i) {
    RngStream init = RngStream::derive(seed, "plant/hw_init/" + seq.id, i);
    RngStream noise_rng = RngStream::derive(seed, "plant/hw_noise/" + seq.id, i);
    out.push_back(run_rollout(seq, hidden_params, gains, config, policy, Source::Hardware, i,
                              init, &noise, noise_rng, pos_curve));
  }
  return out;
}

}  // namespace simcal
