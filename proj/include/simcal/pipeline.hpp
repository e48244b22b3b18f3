#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "simcal/cmaes.hpp"
#include "simcal/metrics.hpp"
#include "simcal/noise.hpp"
#include "simcal/plant.hpp"

namespace simcal {

// Calibration search space: the 8 actuator hyperparameters in box bounds.
// The intersect speeds are searched as fractions of the corresponding speed
// limit so every point in the box maps to a valid envelope.
class CalibrationSpace {
 public:
  static constexpr int kDim = 8;

  CalibrationSpace();
  explicit CalibrationSpace(const Config& cfg);  // calib.lo.<name> / calib.hi.<name>

  const std::vector<std::string>& names() const { return names_; }
  const std::vector<std::pair<double, double>>& bounds() const { return bounds_; }

  ActuatorParams to_params(const Eigen::VectorXd& v) const;
  Eigen::VectorXd from_params(const ActuatorParams& p) const;
  // Coarse pre-calibration guess: zero frictions, symmetric +/-70 N*m and
  // +/-20 rad/s box, intersects at the lower bound.
  Eigen::VectorXd initial_vector() const;

 private:
  std::vector<std::string> names_;
  std::vector<std::pair<double, double>> bounds_;
};

// Everything a pipeline run needs, assembled from one flat config file.
struct Scenario {
  GainConfig gains;
  ActuatorParams params;  // hidden params for make-hardware, model for simulate
  PlantConfig plant;
  ScriptedPolicy policy;
  CommandGenSpec commands;
  CalibrationSpace space;
  CmaesConfig cmaes;  // bounds/initial filled from `space`
  ScoreWeights weights;
  double noise_sigma_q = 0.002;   // rad, defaults when no model file is given
  double noise_sigma_qd = 0.05;   // rad/s
  int hardware_repeats = 5;
  int sim_rollouts = 2;
  bool common_random_numbers = true;
  std::optional<TorquePositionCurve> pos_curve;

  static Scenario from_config(const Config& cfg);
  Config to_config() const;
  const TorquePositionCurve* curve() const { return pos_curve ? &*pos_curve : nullptr; }
};

// --- directory-level operations backing the CLI subcommands ---

// Writes cmd_<id>.csv for the four generated sequences; returns the paths.
std::vector<std::string> write_command_files(const std::string& out_dir,
                                             const CommandGenSpec& spec, std::uint64_t seed);

std::vector<CommandSequence> load_command_dir(const std::string& dir);

// Rollout CSVs in `dir`, skipping sealed `*.hidden` files.
std::vector<Rollout> load_rollout_dir(const std::string& dir);

// Synthetic hardware rollouts for every sequence plus the sealed
// `params.hidden` file holding the ground-truth parameters.
std::vector<std::string> make_hardware(const std::string& command_dir,
                                       const std::string& out_dir, const Scenario& scenario,
                                       const NoiseModel* noise_override, std::uint64_t seed);

// Simulated rollouts for every sequence under scenario.params.
std::vector<std::string> simulate(const std::string& command_dir, const std::string& out_dir,
                                  const Scenario& scenario, std::uint64_t seed);

// Scores a simulated rollout directory against a hardware directory.
ScoreReport score_dirs(const std::string& hardware_dir, const std::string& sim_dir,
                       const Scenario& scenario);

struct CalibrationResult {
  Eigen::VectorXd best_vector;
  ActuatorParams best_params;
  double best_fitness = 0.0;
  double initial_wasserstein = 0.0;  // normalization refs from the first iterate
  double initial_mmd = 0.0;
  std::vector<GenerationRecord> history;
  ScoreReport final_report;
  std::string run_dir;
};

// The full calibration loop: loads hardware data and command sequences,
// normalizes both measures at the initial iterate, then minimizes the
// combined score over the calibration space. Writes history.csv,
// generations.csv, best_params.conf, final_score.csv/.txt, run.conf, and a
// cmaes_state.txt checkpoint under out_dir. Never reads sealed files.
CalibrationResult calibrate(const std::string& command_dir, const std::string& hardware_dir,
                            const std::string& out_dir, const Scenario& scenario,
                            std::uint64_t seed);

// Post-run artifacts: recovered-vs-hidden parameter table (the only reader
// of the sealed file), fitness-history SVG, and per-feature histogram
// overlays of hardware vs best-parameter simulation.
std::vector<std::string> report(const std::string& run_dir, const std::string& hardware_dir,
                                const std::string& command_dir, const std::string& out_dir,
                                int histogram_bins = 50);

// Per-channel sigma estimates from one rollout's q/q_dot columns.
NoiseModel noise_estimate(const std::string& rollout_csv);

}  // namespace simcal
