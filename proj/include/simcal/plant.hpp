#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "simcal/actuator.hpp"
#include "simcal/noise.hpp"
#include "simcal/rollout.hpp"

namespace simcal {

// Desk-scale surrogate plant: twelve decoupled second-order joints driven by
// the actuator model. Stands in for the full simulator so the calibration
// loop is self-contained.
struct PlantConfig {
  double inertia = 0.05;          // kg*m^2 per joint
  double viscous_damping = 0.01;  // N*m*s/rad per joint
  double gravity_torque_amplitude = 2.0;  // N*m, restoring -g*sin(q - q_default)
  Eigen::VectorXd q_default;      // rad, standing pose

  PlantConfig();
  void validate() const;

  static PlantConfig from_config(const Config& cfg, const std::string& prefix = "plant");
  void to_config(Config& cfg, const std::string& prefix = "plant") const;
};

// Deterministic trot-style gait script standing in for a trained policy.
// Gait frequency follows f = base_frequency + frequency_per_mps * |v_x|;
// per-joint amplitudes are affine in the command, diagonal legs share phase,
// and the waveform is a softened square so swings include fast strokes and
// dwell intervals. Output is clamped to |a| <= 1.
struct ScriptedPolicy {
  double base_frequency = 1.5;     // Hz
  double frequency_per_mps = 0.5;  // Hz per m/s of |v_x|
  double knee_amp_per_vx = 0.22;
  double hip_y_amp_per_vx = 0.12;
  double hip_x_amp_per_vy = 0.40;
  double hip_x_amp_per_wz = 0.25;
  double wave_sharpness = 2.0;  // tanh shaping of the base sinusoid

  Eigen::VectorXd action(const CommandSample& cmd, double t) const;

  static ScriptedPolicy from_config(const Config& cfg, const std::string& prefix = "policy");
  void to_config(Config& cfg, const std::string& prefix = "policy") const;
};

struct PlantState {
  Eigen::VectorXd q;      // rad
  Eigen::VectorXd q_dot;  // rad/s
  double t = 0.0;
  DelayBuffer delay;

  PlantState(const PlantConfig& config, const GainConfig& gains);
};

// Advances one policy step: f_torque/f_policy torque substeps of
// delay -> PD -> envelope clamp -> friction/damping/gravity -> semi-implicit
// Euler. When tau_mean_out is given it receives the applied torque averaged
// over the substeps.
void step(PlantState& state, const Eigen::VectorXd& action, const ActuatorParams& params,
          const GainConfig& gains, const PlantConfig& config,
          const TorquePositionCurve* pos_curve = nullptr,
          Eigen::VectorXd* tau_mean_out = nullptr);

// Simulated rollouts: initial pose perturbed by U(-0.2, 0.2) rad per joint,
// no sensor noise, source = simulated.
std::vector<Rollout> rollout_sim(const CommandSequence& seq, const ActuatorParams& params,
                                 const GainConfig& gains, const PlantConfig& config,
                                 const ScriptedPolicy& policy, int n_rollouts,
                                 std::uint64_t seed,
                                 const TorquePositionCurve* pos_curve = nullptr);

// Synthetic hardware: same plant under hidden parameters, source = hardware,
// Gaussian sensor noise applied to the recorded q and q_dot only (the
// internal dynamics stay clean).
std::vector<Rollout> rollout_synthetic_hardware(const CommandSequence& seq,
                                                const ActuatorParams& hidden_params,
                                                const GainConfig& gains,
                                                const PlantConfig& config,
                                                const ScriptedPolicy& policy,
                                                const NoiseModel& noise, int n_repeats,
                                                std::uint64_t seed,
                                                const TorquePositionCurve* pos_curve = nullptr);

}  // namespace simcal
