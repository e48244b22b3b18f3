#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "simcal/common.hpp"
#include "simcal/config.hpp"

namespace simcal {

struct CmaesConfig {
  int population = 10;
  int iterations = 100;
  double sigma0 = 0.3;  // initial step size in normalized [0,1] coordinates
  std::vector<std::pair<double, double>> bounds;  // per-dimension (lo, hi)
  std::uint64_t seed = 0;
  // Optional start point in original coordinates; box center when empty.
  std::vector<double> initial;

  int dim() const { return static_cast<int>(bounds.size()); }
  void validate() const;
};

// Full optimizer state. Search coordinates are normalized to [0,1]^d by the
// bounds; best_params is kept in original coordinates.
struct CmaesState {
  Eigen::VectorXd mean;
  double step_size = 0.3;
  Eigen::MatrixXd covariance;
  Eigen::VectorXd p_sigma;
  Eigen::VectorXd p_c;
  int generation = 0;
  Eigen::VectorXd best_params;
  double best_fitness = std::numeric_limits<double>::infinity();
  bool covariance_repaired = false;
  bool saw_nan_fitness = false;
};

struct GenerationRecord {
  int generation = 0;
  double best = 0.0;       // best fitness in this generation's population
  double mean = 0.0;       // mean fitness of the population
  double step_size = 0.0;  // after the update
  double best_seen = 0.0;  // best fitness over all generations so far
};

struct OptimizeResult {
  Eigen::VectorXd best;
  double best_fitness = 0.0;
  std::vector<GenerationRecord> history;
};

// (mu/mu_w, lambda)-CMA-ES with cumulative step-size adaptation and
// rank-1 + rank-mu covariance updates, standard tutorial constants.
// Bound handling clips sampled candidates to the box. Sampling is
// deterministic per (seed, generation), so runs are reproducible
// regardless of how fitness evaluations are scheduled.
class Cmaes {
 public:
  explicit Cmaes(const CmaesConfig& config);

  // `population` candidates in original coordinates, clipped to bounds.
  std::vector<Eigen::VectorXd> ask();

  // Rank-based update. NaN fitnesses rank worst and set a state flag.
  void tell(const std::vector<Eigen::VectorXd>& candidates,
            const std::vector<double>& fitnesses);

  const CmaesState& state() const { return state_; }
  const CmaesConfig& config() const { return config_; }

  void save(const std::string& path) const;
  static Cmaes load(const std::string& path);

  Eigen::VectorXd to_original(const Eigen::VectorXd& normalized) const;
  Eigen::VectorXd to_normalized(const Eigen::VectorXd& original) const;

 private:
  void refresh_decomposition();

  CmaesConfig config_;
  CmaesState state_;

  // Strategy constants, fixed by (dim, population).
  int mu_ = 0;
  Eigen::VectorXd weights_;
  double mu_eff_ = 0, c_sigma_ = 0, d_sigma_ = 0, c_c_ = 0, c_1_ = 0, c_mu_ = 0, chi_n_ = 0;

  // Cached eigendecomposition of the covariance.
  Eigen::MatrixXd eigen_basis_;
  Eigen::VectorXd eigen_scale_;  // sqrt of eigenvalues
};

// ask/tell loop for `iterations` generations. The batch form evaluates a
// whole population at once (evaluations are independent and may run
// concurrently inside the callback); per_generation, when set, observes
// each record as it is produced. Objective exceptions abort the run and
// propagate annotated with the generation index.
OptimizeResult optimize(const std::function<double(const Eigen::VectorXd&)>& objective,
                        const CmaesConfig& config);
OptimizeResult optimize_batch(
    const std::function<std::vector<double>(const std::vector<Eigen::VectorXd>&)>& objective,
    const CmaesConfig& config,
    const std::function<void(const GenerationRecord&, const Cmaes&)>& per_generation = {});

void write_history_csv(const std::vector<GenerationRecord>& history, const std::string& path);

}  // namespace simcal
