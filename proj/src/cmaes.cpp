#include "simcal/cmaes.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "simcal/csv.hpp"
#include "simcal/rng.hpp"

namespace simcal {

void CmaesConfig::validate() const {
  if (population < 2) throw ConfigError("cmaes population must be >= 2");
  if (iterations < 1) throw ConfigError("cmaes iterations must be >= 1");
  if (sigma0 <= 0) throw ConfigError("cmaes sigma0 must be positive");
  if (bounds.empty()) throw ConfigError("cmaes bounds must not be empty");
  for (const auto& [lo, hi] : bounds)
    if (lo > hi) throw ConfigError("cmaes bound has lo > hi");
  if (!initial.empty() && static_cast<int>(initial.size()) != dim())
    throw ConfigError("cmaes initial point dimension mismatch");
}

Cmaes::Cmaes(const CmaesConfig& config) : config_(config) {
  config_.validate();
  const int d = config_.dim();
  const int lambda = config_.population;

  mu_ = lambda / 2;
  weights_.resize(mu_);
  for (int i = 0; i < mu_; ++i) weights_[i] = std::log(mu_ + 0.5) - std::log(i + 1.0);
  weights_ /= weights_.sum();
  mu_eff_ = 1.0 / weights_.squaredNorm();

  c_sigma_ = (mu_eff_ + 2.0) / (d + mu_eff_ + 5.0);
  d_sigma_ = 1.0 + 2.0 * std::max(0.0, std::sqrt((mu_eff_ - 1.0) / (d + 1.0)) - 1.0) + c_sigma_;
  c_c_ = (4.0 + mu_eff_ / d) / (d + 4.0 + 2.0 * mu_eff_ / d);
  c_1_ = 2.0 / ((d + 1.3) * (d + 1.3) + mu_eff_);
  c_mu_ = std::min(1.0 - c_1_,
                   2.0 * (mu_eff_ - 2.0 + 1.0 / mu_eff_) / ((d + 2.0) * (d + 2.0) + mu_eff_));
  chi_n_ = std::sqrt(static_cast<double>(d)) * (1.0 - 1.0 / (4.0 * d) + 1.0 / (21.0 * d * d));

  state_.mean = config_.initial.empty()
                    ? Eigen::VectorXd::Constant(d, 0.5).eval()
                    : to_normalized(Eigen::Map<const Eigen::VectorXd>(config_.initial.data(), d));
  state_.mean = state_.mean.cwiseMax(0.0).cwiseMin(1.0);
  state_.step_size = config_.sigma0;
  state_.covariance = Eigen::MatrixXd::Identity(d, d);
  state_.p_sigma = Eigen::VectorXd::Zero(d);
  state_.p_c = Eigen::VectorXd::Zero(d);
  refresh_decomposition();
}

Eigen::VectorXd Cmaes::to_original(const Eigen::VectorXd& normalized) const {
  const int d = config_.dim();
  Eigen::VectorXd out(d);
  for (int i = 0; i < d; ++i) {
    const auto& [lo, hi] = config_.bounds[i];
    out[i] = lo + normalized[i] * (hi - lo);
  }
  return out;
}

Eigen::VectorXd Cmaes::to_normalized(const Eigen::VectorXd& original) const {
  const int d = config_.dim();
  if (original.size() != d) throw SchemaError("cmaes: point dimension mismatch");
  Eigen::VectorXd out(d);
  for (int i = 0; i < d; ++i) {
    const auto& [lo, hi] = config_.bounds[i];
    out[i] = hi > lo ? (original[i] - lo) / (hi - lo) : 0.5;
  }
  return out;
}

void Cmaes::refresh_decomposition() {
  const int d = config_.dim();
  // Enforce symmetry, then floor eigenvalues so sampling stays well posed.
  state_.covariance = 0.5 * (state_.covariance + state_.covariance.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(state_.covariance);
  Eigen::VectorXd eig = solver.eigenvalues();
  const double max_eig = std::max(eig.maxCoeff(), 1e-30);
  const double floor_eig = max_eig * 1e-14;
  bool repaired = false;
  for (int i = 0; i < d; ++i) {
    if (!(eig[i] >= floor_eig)) {
      eig[i] = floor_eig;
      repaired = true;
    }
  }
  if (repaired) {
    state_.covariance =
        solver.eigenvectors() * eig.asDiagonal() * solver.eigenvectors().transpose();
    state_.covariance_repaired = true;
  }
  eigen_basis_ = solver.eigenvectors();
  eigen_scale_ = eig.cwiseSqrt();
}

std::vector<Eigen::VectorXd> Cmaes::ask() {
  const int d = config_.dim();
  RngStream rng = RngStream::derive(config_.seed, "cmaes/ask", state_.generation);
  std::vector<Eigen::VectorXd> candidates;
  candidates.reserve(config_.population);
  for (int k = 0; k < config_.population; ++k) {
    Eigen::VectorXd z(d);
    for (int i = 0; i < d; ++i) z[i] = rng.normal();
    Eigen::VectorXd x =
        state_.mean + state_.step_size * (eigen_basis_ * (eigen_scale_.asDiagonal() * z));
    x = x.cwiseMax(0.0).cwiseMin(1.0);  // clip to the box, penalty-free
    candidates.push_back(to_original(x));
  }
  return candidates;
}

void Cmaes::tell(const std::vector<Eigen::VectorXd>& candidates,
                 const std::vector<double>& fitnesses) {
  const int d = config_.dim();
  const int lambda = config_.population;
  if (static_cast<int>(candidates.size()) != lambda ||
      static_cast<int>(fitnesses.size()) != lambda)
    throw SchemaError("cmaes tell: need exactly one fitness per population candidate");
  for (double f : fitnesses)
    if (std::isinf(f) && f < 0) throw NumericError("cmaes tell: fitness is -inf");

  std::vector<int> order(lambda);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    const double fa = fitnesses[a], fb = fitnesses[b];
    const bool na = std::isnan(fa), nb = std::isnan(fb);
    if (na != nb) return nb;  // NaN ranks worst
    if (na && nb) return false;
    return fa < fb;
  });
  for (double f : fitnesses)
    if (std::isnan(f)) state_.saw_nan_fitness = true;

  // Normalized views of the selected candidates.
  std::vector<Eigen::VectorXd> selected(mu_);
  for (int i = 0; i < mu_; ++i) selected[i] = to_normalized(candidates[order[i]]);

  const Eigen::VectorXd mean_old = state_.mean;
  Eigen::VectorXd mean_new = Eigen::VectorXd::Zero(d);
  for (int i = 0; i < mu_; ++i) mean_new += weights_[i] * selected[i];

  const double sigma = state_.step_size;
  const Eigen::VectorXd y_w = (mean_new - mean_old) / sigma;

  // C^(-1/2) y_w via the cached eigendecomposition.
  const Eigen::VectorXd inv_scaled =
      eigen_basis_ * (eigen_scale_.cwiseInverse().asDiagonal() *
                      (eigen_basis_.transpose() * y_w));
  state_.p_sigma = (1.0 - c_sigma_) * state_.p_sigma +
                   std::sqrt(c_sigma_ * (2.0 - c_sigma_) * mu_eff_) * inv_scaled;

  const double ps_norm = state_.p_sigma.norm();
  const double expected_decay =
      std::sqrt(1.0 - std::pow(1.0 - c_sigma_, 2.0 * (state_.generation + 1)));
  const bool h_sigma = ps_norm / expected_decay < (1.4 + 2.0 / (d + 1.0)) * chi_n_;

  state_.p_c = (1.0 - c_c_) * state_.p_c +
               (h_sigma ? std::sqrt(c_c_ * (2.0 - c_c_) * mu_eff_) : 0.0) * y_w;

  Eigen::MatrixXd rank_mu = Eigen::MatrixXd::Zero(d, d);
  for (int i = 0; i < mu_; ++i) {
    const Eigen::VectorXd y = (selected[i] - mean_old) / sigma;
    rank_mu += weights_[i] * (y * y.transpose());
  }
  const double stall = (1.0 - (h_sigma ? 1.0 : 0.0)) * c_c_ * (2.0 - c_c_);
  state_.covariance = (1.0 - c_1_ - c_mu_) * state_.covariance +
                      c_1_ * (state_.p_c * state_.p_c.transpose() + stall * state_.covariance) +
                      c_mu_ * rank_mu;

  state_.step_size = sigma * std::exp((c_sigma_ / d_sigma_) * (ps_norm / chi_n_ - 1.0));
  state_.mean = mean_new;
  state_.generation += 1;

  const int best_idx = order[0];
  if (!std::isnan(fitnesses[best_idx]) && fitnesses[best_idx] < state_.best_fitness) {
    state_.best_fitness = fitnesses[best_idx];
    state_.best_params = candidates[best_idx];
  }
  refresh_decomposition();
}

void Cmaes::save(const std::string& path) const {
  Config cfg;
  const int d = config_.dim();
  cfg.set("cmaes.population", config_.population);
  cfg.set("cmaes.iterations", config_.iterations);
  cfg.set("cmaes.sigma0", config_.sigma0);
  cfg.set("cmaes.seed", std::to_string(config_.seed));
  cfg.set("cmaes.dim", d);
  for (int i = 0; i < d; ++i) {
    cfg.set("cmaes.bounds_lo." + std::to_string(i), config_.bounds[i].first);
    cfg.set("cmaes.bounds_hi." + std::to_string(i), config_.bounds[i].second);
  }
  const auto vec = [&](const std::string& key, const Eigen::VectorXd& v) {
    std::string s;
    for (Eigen::Index i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_double(v[i]);
    cfg.set(key, s);
  };
  vec("state.mean", state_.mean);
  vec("state.p_sigma", state_.p_sigma);
  vec("state.p_c", state_.p_c);
  cfg.set("state.step_size", state_.step_size);
  cfg.set("state.generation", state_.generation);
  for (int i = 0; i < d; ++i) {
    Eigen::VectorXd row = state_.covariance.row(i);
    vec("state.cov." + std::to_string(i), row);
  }
  cfg.set("state.best_fitness", state_.best_fitness);
  if (state_.best_params.size() > 0) vec("state.best_params", state_.best_params);
  cfg.set("state.covariance_repaired", state_.covariance_repaired ? 1 : 0);
  cfg.set("state.saw_nan_fitness", state_.saw_nan_fitness ? 1 : 0);
  cfg.write_file(path);
}

Cmaes Cmaes::load(const std::string& path) {
  const Config cfg = Config::from_file(path);
  CmaesConfig config;
  config.population = cfg.get_int("cmaes.population");
  config.iterations = cfg.get_int("cmaes.iterations");
  config.sigma0 = cfg.get_double("cmaes.sigma0");
  config.seed = static_cast<std::uint64_t>(std::stoull(cfg.get_string("cmaes.seed")));
  const int d = cfg.get_int("cmaes.dim");
  for (int i = 0; i < d; ++i)
    config.bounds.emplace_back(cfg.get_double("cmaes.bounds_lo." + std::to_string(i)),
                               cfg.get_double("cmaes.bounds_hi." + std::to_string(i)));
  Cmaes cma(config);
  const auto vec = [&](const std::string& key) {
    const auto v = cfg.get_doubles(key);
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())).eval();
  };
  cma.state_.mean = vec("state.mean");
  cma.state_.p_sigma = vec("state.p_sigma");
  cma.state_.p_c = vec("state.p_c");
  cma.state_.step_size = cfg.get_double("state.step_size");
  cma.state_.generation = cfg.get_int("state.generation");
  cma.state_.covariance.resize(d, d);
  for (int i = 0; i < d; ++i) cma.state_.covariance.row(i) = vec("state.cov." + std::to_string(i));
  cma.state_.best_fitness = cfg.get_double("state.best_fitness");
  if (cfg.has("state.best_params")) cma.state_.best_params = vec("state.best_params");
  cma.state_.covariance_repaired = cfg.get_int("state.covariance_repaired") != 0;
  cma.state_.saw_nan_fitness = cfg.get_int("state.saw_nan_fitness") != 0;
  cma.refresh_decomposition();
  return cma;
}

OptimizeResult optimize(const std::function<double(const Eigen::VectorXd&)>& objective,
                        const CmaesConfig& config) {
  return optimize_batch(
      [&objective](const std::vector<Eigen::VectorXd>& candidates) {
        std::vector<double> fitnesses;
        fitnesses.reserve(candidates.size());
        for (const auto& c : candidates) fitnesses.push_back(objective(c));
        return fitnesses;
      },
      config);
}

OptimizeResult optimize_batch(
    const std::function<std::vector<double>(const std::vector<Eigen::VectorXd>&)>& objective,
    const CmaesConfig& config,
    const std::function<void(const GenerationRecord&, const Cmaes&)>& per_generation) {
  Cmaes cma(config);
  OptimizeResult result;
  result.history.reserve(config.iterations);
  for (int g = 0; g < config.iterations; ++g) {
    const auto candidates = cma.ask();
    std::vector<double> fitnesses;
    try {
      fitnesses = objective(candidates);
    } catch (const std::exception& e) {
      throw NumericError("objective failed at generation " + std::to_string(g) + ": " +
                         e.what());
    }
    cma.tell(candidates, fitnesses);

    GenerationRecord rec;
    rec.generation = g;
    rec.step_size = cma.state().step_size;
    rec.best = std::numeric_limits<double>::infinity();
    double sum = 0.0;
    int finite = 0;
    for (double f : fitnesses) {
      if (std::isnan(f)) continue;
      rec.best = std::min(rec.best, f);
      sum += f;
      ++finite;
    }
    rec.mean = finite > 0 ? sum / finite : std::numeric_limits<double>::quiet_NaN();
    rec.best_seen = cma.state().best_fitness;
    result.history.push_back(rec);
    if (per_generation) per_generation(rec, cma);
  }
  result.best = cma.state().best_params;
  result.best_fitness = cma.state().best_fitness;
  return result;
}

void write_history_csv(const std::vector<GenerationRecord>& history, const std::string& path) {
  CsvWriter w(path);
  w.header({"generation", "best", "mean", "step_size"});
  for (const auto& rec : history)
    w.row({static_cast<double>(rec.generation), rec.best, rec.mean, rec.step_size});
  w.close();
}

}  // namespace simcal
