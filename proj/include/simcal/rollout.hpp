#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "simcal/actuator.hpp"
#include "simcal/common.hpp"

namespace simcal {

struct CommandSample {
  double t = 0.0;        // s
  double v_x = 0.0;      // m/s, longitudinal
  double v_y = 0.0;      // m/s, lateral
  double omega_z = 0.0;  // rad/s, yaw rate
};

// Command bounds used by the randomized generator.
inline constexpr double kCmdVxMin = -2.0, kCmdVxMax = 5.5;
inline constexpr double kCmdVyMin = -1.5, kCmdVyMax = 1.5;
inline constexpr double kCmdWzMin = -2.0, kCmdWzMax = 2.0;

struct CommandSequence {
  std::string id;  // forward_run | six_direction | randomized | user
  double f_policy = 50.0;
  std::vector<CommandSample> samples;  // uniform spacing 1/f_policy

  double duration() const { return static_cast<double>(samples.size()) / f_policy; }
  void validate() const;
};

struct CommandGenSpec {
  double f_policy_hz = 50.0;
  double duration_s = 10.0;
  double resample_interval_s = 2.0;  // randomized sequence

  static CommandGenSpec from_config(const Config& cfg, const std::string& prefix = "commands");
  void to_config(Config& cfg, const std::string& prefix = "commands") const;
};

// Produces the four test sequences: forward_run (ramp to 4 m/s and hold),
// six_direction (1.5 m/s holds on each signed axis with zero-command gaps),
// randomized (piecewise-constant uniform resampling), and user (a fixed
// scripted mix standing in for a teleop trace).
std::vector<CommandSequence> gen_command_sequences(const CommandGenSpec& spec,
                                                   std::uint64_t seed);

void save_command_sequence(const CommandSequence& seq, const std::string& path);
CommandSequence load_command_sequence(const std::string& path);

enum class Source { Hardware, Simulated };

std::string to_string(Source s);
Source source_from_string(const std::string& s);

// One executed command sequence: per-step joint positions, velocities,
// actions, the commands, and optionally the applied torques.
struct Rollout {
  std::string sequence_id;
  Source source = Source::Simulated;
  int repeat_index = 0;
  double dt = 0.02;  // 1/f_policy

  Eigen::VectorXd t;        // steps
  Eigen::MatrixXd q;        // steps x 12, rad
  Eigen::MatrixXd q_dot;    // steps x 12, rad/s
  Eigen::MatrixXd action;   // steps x 12, dimensionless
  Eigen::MatrixXd command;  // steps x 3 (v_x, v_y, omega_z)
  Eigen::MatrixXd tau;      // steps x 12 or 0 x 0 when not recorded

  int steps() const { return static_cast<int>(q.rows()); }
  bool has_tau() const { return tau.rows() > 0; }
  void validate() const;
  bool operator==(const Rollout& other) const;
};

void save_rollout(const Rollout& r, const std::string& path);
Rollout load_rollout(const std::string& path);

// 36 columns: [q_j * k_p | qdot_j * k_d | a_j * sigma_a * k_p], rows are
// timesteps. No centering or whitening beyond the gain scaling.
using FeatureMatrix = Eigen::MatrixXd;
FeatureMatrix extract_features(const Rollout& r, const GainConfig& gains);

inline constexpr int kNumFeatures = 3 * kNumJoints;
std::vector<std::string> feature_names();

}  // namespace simcal
