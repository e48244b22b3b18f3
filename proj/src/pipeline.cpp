#include "simcal/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "simcal/csv.hpp"

namespace fs = std::filesystem;

namespace simcal {

CalibrationSpace::CalibrationSpace() : CalibrationSpace(Config{}) {}

CalibrationSpace::CalibrationSpace(const Config& cfg) {
  names_ = {"friction_hip", "friction_knee",     "tau_max",           "tau_min",
            "omega_max",    "omega_min",         "intersect_pos_frac", "intersect_neg_frac"};
  bounds_ = {{0.0, 0.5},  {0.0, 0.5},  {20.0, 180.0}, {-180.0, -20.0},
             {5.0, 40.0}, {-40.0, -5.0}, {0.02, 0.95},  {0.02, 0.95}};
  for (int i = 0; i < kDim; ++i) {
    bounds_[i].first = cfg.get_double("calib.lo." + names_[i], bounds_[i].first);
    bounds_[i].second = cfg.get_double("calib.hi." + names_[i], bounds_[i].second);
    if (bounds_[i].first >= bounds_[i].second)
      throw ConfigError("calibration bound for " + names_[i] + " has lo >= hi");
  }
}

ActuatorParams CalibrationSpace::to_params(const Eigen::VectorXd& v) const {
  if (v.size() != kDim) throw SchemaError("calibration vector must have 8 entries");
  ActuatorParams p;
  p.friction_hip = v[0];
  p.friction_knee = v[1];
  p.tau_max = v[2];
  p.tau_min = v[3];
  p.omega_max = v[4];
  p.omega_min = v[5];
  p.intersect_pos = v[6] * p.omega_max;
  p.intersect_neg = v[7] * p.omega_min;
  p.validate();
  return p;
}

Eigen::VectorXd CalibrationSpace::from_params(const ActuatorParams& p) const {
  Eigen::VectorXd v(kDim);
  v << p.friction_hip, p.friction_knee, p.tau_max, p.tau_min, p.omega_max, p.omega_min,
      p.intersect_pos / p.omega_max, p.intersect_neg / p.omega_min;
  return v;
}

Eigen::VectorXd CalibrationSpace::initial_vector() const {
  Eigen::VectorXd v(kDim);
  v << 0.0, 0.0, 70.0, -70.0, 20.0, -20.0, 0.0, 0.0;
  for (int i = 0; i < kDim; ++i)
    v[i] = std::clamp(v[i], bounds_[i].first, bounds_[i].second);
  return v;
}

Scenario Scenario::from_config(const Config& cfg) {
  Scenario s;
  s.gains = GainConfig::from_config(cfg);
  s.params = ActuatorParams::from_config(cfg);
  s.plant = PlantConfig::from_config(cfg);
  s.policy = ScriptedPolicy::from_config(cfg);
  s.commands = CommandGenSpec::from_config(cfg);
  s.space = CalibrationSpace(cfg);
  s.cmaes.population = cfg.get_int("cmaes.population", 10);
  s.cmaes.iterations = cfg.get_int("cmaes.iterations", 100);
  s.cmaes.sigma0 = cfg.get_double("cmaes.sigma0", 0.3);
  s.cmaes.bounds = s.space.bounds();
  s.weights.w_wasserstein = cfg.get_double("score.w_wasserstein", 0.5);
  s.weights.w_mmd = cfg.get_double("score.w_mmd", 0.5);
  for (const auto& id : cfg.keys_with_prefix("score.seq_weight"))
    s.weights.sequence[id] = cfg.get_double("score.seq_weight." + id);
  s.noise_sigma_q = cfg.get_double("noise.sigma_q", s.noise_sigma_q);
  s.noise_sigma_qd = cfg.get_double("noise.sigma_qd", s.noise_sigma_qd);
  s.hardware_repeats = cfg.get_int("hardware.repeats", s.hardware_repeats);
  s.sim_rollouts = cfg.get_int("sim.rollouts", s.sim_rollouts);
  s.common_random_numbers = cfg.get_int("calib.common_random_numbers", 1) != 0;
  if (cfg.has("plant.torque_position_curve"))
    s.pos_curve = TorquePositionCurve::from_csv(cfg.get_string("plant.torque_position_curve"));
  if (s.hardware_repeats < 1) throw ConfigError("hardware.repeats must be >= 1");
  if (s.sim_rollouts < 1) throw ConfigError("sim.rollouts must be >= 1");
  return s;
}

Config Scenario::to_config() const {
  Config cfg;
  gains.to_config(cfg);
  params.to_config(cfg);
  plant.to_config(cfg);
  policy.to_config(cfg);
  commands.to_config(cfg);
  for (int i = 0; i < CalibrationSpace::kDim; ++i) {
    cfg.set("calib.lo." + space.names()[i], space.bounds()[i].first);
    cfg.set("calib.hi." + space.names()[i], space.bounds()[i].second);
  }
  cfg.set("cmaes.population", cmaes.population);
  cfg.set("cmaes.iterations", cmaes.iterations);
  cfg.set("cmaes.sigma0", cmaes.sigma0);
  cfg.set("score.w_wasserstein", weights.w_wasserstein);
  cfg.set("score.w_mmd", weights.w_mmd);
  for (const auto& [id, w] : weights.sequence) cfg.set("score.seq_weight." + id, w);
  cfg.set("noise.sigma_q", noise_sigma_q);
  cfg.set("noise.sigma_qd", noise_sigma_qd);
  cfg.set("hardware.repeats", hardware_repeats);
  cfg.set("sim.rollouts", sim_rollouts);
  cfg.set("calib.common_random_numbers", common_random_numbers ? 1 : 0);
  return cfg;
}

namespace {

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw SchemaError("cannot create directory " + dir + ": " + ec.message());
}

std::vector<std::string> sorted_files(const std::string& dir, const std::string& ext,
                                      const std::string& what) {
  if (!fs::is_directory(dir)) throw SchemaError(what + " directory missing: " + dir);
  std::vector<std::string> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto p = entry.path();
    if (p.extension() == ext) files.push_back(p.string());
  }
  std::sort(files.begin(), files.end());
  return files;
}

// Evaluate f on [0, n) collecting results by index; order-independent.
template <typename F>
std::vector<double> parallel_map(int n, F&& f) {
  const unsigned hw = std::thread::hardware_concurrency();
  if (hw <= 1 || n <= 1) {
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) out[i] = f(i);
    return out;
  }
  std::vector<std::future<double>> futures;
  futures.reserve(n);
  for (int i = 0; i < n; ++i)
    futures.push_back(std::async(std::launch::async, [&f, i] { return f(i); }));
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = futures[i].get();
  return out;
}

}  // namespace

std::vector<std::string> write_command_files(const std::string& out_dir,
                                             const CommandGenSpec& spec, std::uint64_t seed) {
  ensure_dir(out_dir);
  std::vector<std::string> paths;
  for (const auto& seq : gen_command_sequences(spec, seed)) {
    const std::string path = (fs::path(out_dir) / ("cmd_" + seq.id + ".csv")).string();
    save_command_sequence(seq, path);
    paths.push_back(path);
  }
  return paths;
}

std::vector<CommandSequence> load_command_dir(const std::string& dir) {
  std::vector<CommandSequence> seqs;
  for (const auto& path : sorted_files(dir, ".csv", "command")) {
    if (fs::path(path).filename().string().rfind("cmd_", 0) != 0) continue;
    seqs.push_back(load_command_sequence(path));
  }
  if (seqs.empty()) throw SchemaError("no cmd_*.csv command files in " + dir);
  return seqs;
}

std::vector<Rollout> load_rollout_dir(const std::string& dir) {
  std::vector<Rollout> rollouts;
  for (const auto& path : sorted_files(dir, ".csv", "rollout"))
    rollouts.push_back(load_rollout(path));
  if (rollouts.empty()) throw SchemaError("no rollout CSVs in " + dir);
  return rollouts;
}

std::vector<std::string> make_hardware(const std::string& command_dir,
                                       const std::string& out_dir, const Scenario& scenario,
                                       const NoiseModel* noise_override, std::uint64_t seed) {
  const auto seqs = load_command_dir(command_dir);
  ensure_dir(out_dir);
  const NoiseModel noise = noise_override != nullptr
                               ? *noise_override
                               : NoiseModel::uniform(scenario.noise_sigma_q,
                                                     scenario.noise_sigma_qd,
                                                     scenario.gains.f_policy);
  std::vector<std::string> paths;
  for (const auto& seq : seqs) {
    const auto rollouts = rollout_synthetic_hardware(
        seq, scenario.params, scenario.gains, scenario.plant, scenario.policy, noise,
        scenario.hardware_repeats, seed, scenario.curve());
    for (const auto& r : rollouts) {
      const std::string path =
          (fs::path(out_dir) / ("hw_" + seq.id + "_rep" + std::to_string(r.repeat_index) + ".csv"))
              .string();
      save_rollout(r, path);
      paths.push_back(path);
    }
  }
  // Ground truth goes to a sealed side file the calibration path never opens.
  Config hidden;
  scenario.params.to_config(hidden);
  hidden.write_file((fs::path(out_dir) / "params.hidden").string());
  return paths;
}

std::vector<std::string> simulate(const std::string& command_dir, const std::string& out_dir,
                                  const Scenario& scenario, std::uint64_t seed) {
  const auto seqs = load_command_dir(command_dir);
  ensure_dir(out_dir);
  std::vector<std::string> paths;
  for (const auto& seq : seqs) {
    const auto rollouts =
        rollout_sim(seq, scenario.params, scenario.gains, scenario.plant, scenario.policy,
                    scenario.sim_rollouts, seed, scenario.curve());
    for (const auto& r : rollouts) {
      const std::string path =
          (fs::path(out_dir) / ("sim_" + seq.id + "_" + std::to_string(r.repeat_index) + ".csv"))
              .string();
      save_rollout(r, path);
      paths.push_back(path);
    }
  }
  return paths;
}

ScoreReport score_dirs(const std::string& hardware_dir, const std::string& sim_dir,
                       const Scenario& scenario) {
  const auto hardware = load_rollout_dir(hardware_dir);
  const auto simulated = load_rollout_dir(sim_dir);
  return similarity_score(hardware, simulated, scenario.gains, scenario.weights);
}

namespace {

// Measure aggregates used for normalization: sequence-weighted means of the
// raw Wasserstein and (clamped) MMD columns.
std::pair<double, double> measure_aggregates(const ScoreReport& report,
                                             const ScoreWeights& weights) {
  double total_w = 0.0;
  for (const auto& s : report.per_sequence)
    total_w += weights.sequence.empty() ? 1.0 : weights.sequence.at(s.sequence_id);
  double agg_wass = 0.0, agg_mmd = 0.0;
  for (const auto& s : report.per_sequence) {
    const double w =
        (weights.sequence.empty() ? 1.0 : weights.sequence.at(s.sequence_id)) / total_w;
    agg_wass += w * s.wasserstein;
    agg_mmd += w * std::max(s.mmd, 0.0);
  }
  return {agg_wass, agg_mmd};
}

}  // namespace

CalibrationResult calibrate(const std::string& command_dir, const std::string& hardware_dir,
                            const std::string& out_dir, const Scenario& scenario,
                            std::uint64_t seed) {
  const auto start_time = std::chrono::steady_clock::now();
  const auto seqs = load_command_dir(command_dir);
  const auto hardware = load_rollout_dir(hardware_dir);
  ensure_dir(out_dir);

  std::set<std::string> hw_ids;
  for (const auto& h : hardware) {
    if (h.source != Source::Hardware)
      throw SchemaError("rollout in hardware directory has source=simulated: " + h.sequence_id);
    hw_ids.insert(h.sequence_id);
  }
  std::vector<CommandSequence> active;
  for (const auto& seq : seqs)
    if (hw_ids.count(seq.id)) active.push_back(seq);
  if (active.empty())
    throw SchemaError("no command sequence matches the hardware rollouts in " + hardware_dir);

  const Scenario& sc = scenario;
  const auto simulate_candidate = [&](const ActuatorParams& params, std::uint64_t sim_seed) {
    std::vector<Rollout> sims;
    for (const auto& seq : active) {
      auto r = rollout_sim(seq, params, sc.gains, sc.plant, sc.policy, sc.sim_rollouts,
                           sim_seed, sc.curve());
      std::move(r.begin(), r.end(), std::back_inserter(sims));
    }
    return sims;
  };

  // Normalize both measures at the initial iterate so they contribute on the
  // same scale; the initial combined score is then w_W + w_M = 1.
  const std::uint64_t base_sim_seed = RngStream::derive(seed, "calibrate/sim").next_u64();
  const Eigen::VectorXd x0 = sc.space.initial_vector();
  ScoreWeights weights = sc.weights;
  {
    const auto report0 =
        similarity_score(hardware, simulate_candidate(sc.space.to_params(x0), base_sim_seed),
                         sc.gains, weights);
    const auto [w0, m0] = measure_aggregates(report0, weights);
    weights.wasserstein_ref = std::max(w0, 1e-12);
    weights.mmd_ref = std::max(m0, 1e-12);
  }

  CmaesConfig cma_cfg = sc.cmaes;
  cma_cfg.bounds = sc.space.bounds();
  cma_cfg.seed = RngStream::derive(seed, "calibrate/cmaes").next_u64();
  cma_cfg.initial.assign(x0.data(), x0.data() + x0.size());

  CsvWriter generations((fs::path(out_dir) / "generations.csv").string());
  {
    std::vector<std::string> cols = {"generation", "candidate", "fitness"};
    for (const auto& n : sc.space.names()) cols.push_back(n);
    generations.header(cols);
  }

  int generation_counter = 0;
  const auto batch_objective = [&](const std::vector<Eigen::VectorXd>& candidates) {
    const int g = generation_counter++;
    const auto fitnesses = parallel_map(static_cast<int>(candidates.size()), [&](int i) {
      const ActuatorParams params = sc.space.to_params(candidates[i]);
      const std::uint64_t sim_seed =
          sc.common_random_numbers
              ? base_sim_seed
              : RngStream::derive(seed, "calibrate/sim_regen", g, i).next_u64();
      const auto report =
          similarity_score(hardware, simulate_candidate(params, sim_seed), sc.gains, weights);
      return report.combined;
    });
    for (size_t i = 0; i < candidates.size(); ++i) {
      std::vector<double> row = {static_cast<double>(g), static_cast<double>(i), fitnesses[i]};
      const ActuatorParams p = sc.space.to_params(candidates[i]);
      const Eigen::VectorXd pv = p.as_vector();
      for (int j = 0; j < 8; ++j) row.push_back(pv[j]);
      generations.row(row);
    }
    return fitnesses;
  };

  const std::string checkpoint_path = (fs::path(out_dir) / "cmaes_state.txt").string();
  const std::string history_path = (fs::path(out_dir) / "history.csv").string();
  std::vector<GenerationRecord> partial_history;
  OptimizeResult opt;
  try {
    opt = optimize_batch(batch_objective, cma_cfg,
                         [&](const GenerationRecord& rec, const Cmaes& cma) {
                           partial_history.push_back(rec);
                           cma.save(checkpoint_path);
                         });
  } catch (...) {
    // Aborted runs keep what completed: the per-candidate record and the
    // history of finished generations.
    generations.close();
    write_history_csv(partial_history, history_path);
    throw;
  }
  generations.close();

  CalibrationResult result;
  result.best_vector = opt.best;
  result.best_params = sc.space.to_params(opt.best);
  result.best_fitness = opt.best_fitness;
  result.initial_wasserstein = weights.wasserstein_ref;
  result.initial_mmd = weights.mmd_ref;
  result.history = opt.history;
  result.run_dir = out_dir;

  write_history_csv(opt.history, (fs::path(out_dir) / "history.csv").string());

  Config best;
  result.best_params.to_config(best);
  best.write_file((fs::path(out_dir) / "best_params.conf").string());

  result.final_report = similarity_score(
      hardware, simulate_candidate(result.best_params, base_sim_seed), sc.gains, weights);
  result.final_report.write_csv((fs::path(out_dir) / "final_score.csv").string());
  {
    std::ofstream txt((fs::path(out_dir) / "final_score.txt").string());
    txt << result.final_report.summary();
  }

  Config run = sc.to_config();
  run.set("run.seed", std::to_string(seed));
  run.set("run.wasserstein_ref", weights.wasserstein_ref);
  run.set("run.mmd_ref", weights.mmd_ref);
  run.set("run.best_fitness", result.best_fitness);
  run.set("run.generations", static_cast<int>(opt.history.size()));
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start_time).count();
  run.set("run.elapsed_seconds", elapsed);
  run.write_file((fs::path(out_dir) / "run.conf").string());
  return result;
}

// ---------------------------------------------------------------- reports

namespace {

std::string svg_open(int width, int height) {
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
    << "\" viewBox=\"0 0 " << width << " " << height << "\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  return s.str();
}

std::string svg_text(double x, double y, const std::string& text, int size = 12) {
  std::ostringstream s;
  s << "<text x=\"" << x << "\" y=\"" << y << "\" font-family=\"sans-serif\" font-size=\""
    << size << "\">" << text << "</text>\n";
  return s.str();
}

std::string svg_polyline(const std::vector<std::pair<double, double>>& pts,
                         const std::string& color) {
  std::ostringstream s;
  s << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
  for (const auto& [x, y] : pts) s << x << "," << y << " ";
  s << "\"/>\n";
  return s.str();
}

void write_fitness_svg(const std::vector<std::vector<double>>& history_rows,
                       const std::string& path) {
  const int width = 720, height = 420, margin = 50;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& row : history_rows) {
    lo = std::min(lo, row[1]);
    hi = std::max(hi, row[1]);
  }
  if (!(hi > lo)) hi = lo + 1.0;
  const double n = static_cast<double>(history_rows.size());
  std::vector<std::pair<double, double>> best_pts, mean_pts;
  for (const auto& row : history_rows) {
    const double x = margin + row[0] / std::max(n - 1.0, 1.0) * (width - 2 * margin);
    const auto ymap = [&](double v) {
      return height - margin - (v - lo) / (hi - lo) * (height - 2 * margin);
    };
    best_pts.emplace_back(x, ymap(row[1]));
    mean_pts.emplace_back(x, ymap(std::min(row[2], hi)));
  }
  std::ofstream out(path);
  out << svg_open(width, height);
  out << svg_text(margin, 24, "calibration fitness by generation", 14);
  out << svg_text(margin, 40, "best (blue), population mean (gray)");
  out << svg_polyline(mean_pts, "#999999");
  out << svg_polyline(best_pts, "#1f77b4");
  out << svg_text(margin, height - 12, "generation");
  out << "</svg>\n";
}

void write_histogram_svg(const FeatureMatrix& hw, const FeatureMatrix& sim, int bins,
                         const std::string& path) {
  // 36 small-multiple overlays in a 6x6 grid.
  const int cols = 6, rows = 6, cell_w = 190, cell_h = 130, pad = 14;
  const int width = cols * cell_w + pad, height = rows * cell_h + pad + 20;
  const auto names = feature_names();
  std::ofstream out(path);
  out << svg_open(width, height);
  out << svg_text(pad, 16, "feature histograms: hardware (gray) vs calibrated sim (blue)");
  for (int f = 0; f < hw.cols() && f < cols * rows; ++f) {
    const int cx = (f % cols) * cell_w + pad;
    const int cy = (f / cols) * cell_h + pad + 20;
    double lo = std::min(hw.col(f).minCoeff(), sim.col(f).minCoeff());
    double hi = std::max(hw.col(f).maxCoeff(), sim.col(f).maxCoeff());
    if (!(hi > lo)) hi = lo + 1.0;
    std::vector<int> ch(bins, 0), cs(bins, 0);
    const auto bin_of = [&](double v) {
      return std::min(bins - 1, static_cast<int>((v - lo) / (hi - lo) * bins));
    };
    for (Eigen::Index i = 0; i < hw.rows(); ++i) ch[bin_of(hw(i, f))]++;
    for (Eigen::Index i = 0; i < sim.rows(); ++i) cs[bin_of(sim(i, f))]++;
    const int peak = std::max({1, *std::max_element(ch.begin(), ch.end()),
                               *std::max_element(cs.begin(), cs.end())});
    const double plot_h = cell_h - 34.0, plot_w = cell_w - 18.0;
    const double bw = plot_w / bins;
    for (int b = 0; b < bins; ++b) {
      const double hh = plot_h * ch[b] / peak;
      const double hs = plot_h * cs[b] / peak;
      out << "<rect x=\"" << cx + b * bw << "\" y=\"" << cy + 18 + (plot_h - hh) << "\" width=\""
          << bw << "\" height=\"" << hh << "\" fill=\"#bbbbbb\"/>\n";
      out << "<rect x=\"" << cx + b * bw << "\" y=\"" << cy + 18 + (plot_h - hs) << "\" width=\""
          << bw << "\" height=\"" << hs << "\" fill=\"#1f77b4\" fill-opacity=\"0.55\"/>\n";
    }
    out << svg_text(cx, cy + 12, names[f], 10);
  }
  out << "</svg>\n";
}

}  // namespace

std::vector<std::string> report(const std::string& run_dir, const std::string& hardware_dir,
                                const std::string& command_dir, const std::string& out_dir,
                                int histogram_bins) {
  if (!fs::is_directory(run_dir)) throw SchemaError("calibration run directory missing: " + run_dir);
  if (histogram_bins < 1) throw ConfigError("histogram bins must be >= 1");
  ensure_dir(out_dir);
  const Config run_cfg = Config::from_file((fs::path(run_dir) / "run.conf").string());
  Scenario scenario = Scenario::from_config(run_cfg);
  const Config best_cfg = Config::from_file((fs::path(run_dir) / "best_params.conf").string());
  const ActuatorParams recovered = ActuatorParams::from_config(best_cfg);

  std::vector<std::string> outputs;

  // (a) Recovered vs hidden parameters. This is the one place the sealed
  // ground-truth file is opened; the table is explicitly oracle output.
  {
    const std::string hidden_path = (fs::path(hardware_dir) / "params.hidden").string();
    std::optional<ActuatorParams> hidden;
    if (fs::exists(hidden_path))
      hidden = ActuatorParams::from_config(Config::from_file(hidden_path));
    const std::string path = (fs::path(out_dir) / "params_table.csv").string();
    CsvWriter w(path);
    w.metadata("note", "oracle output: hidden column read from the sealed ground-truth file");
    w.header({"param", "recovered", "hidden", "abs_error", "rel_error"});
    const Eigen::VectorXd rv = recovered.as_vector();
    const Eigen::VectorXd hv =
        hidden ? hidden->as_vector() : Eigen::VectorXd::Constant(8, std::nan(""));
    for (int i = 0; i < 8; ++i) {
      const double abs_err = rv[i] - hv[i];
      const double rel_err = std::abs(hv[i]) > 0 ? abs_err / std::abs(hv[i]) : std::nan("");
      w.row(ActuatorParams::names()[i], {rv[i], hv[i], abs_err, rel_err});
    }
    w.close();
    outputs.push_back(path);
  }

  // (b) Fitness history plot.
  {
    const CsvTable history = read_csv((fs::path(run_dir) / "history.csv").string());
    const std::string path = (fs::path(out_dir) / "fitness_history.svg").string();
    write_fitness_svg(history.rows, path);
    outputs.push_back(path);
  }

  // (c) Per-feature histogram overlays, hardware vs best-parameter sim.
  {
    const auto hardware = load_rollout_dir(hardware_dir);
    scenario.params = recovered;
    const auto seqs = load_command_dir(command_dir);
    std::vector<Rollout> sims;
    const std::uint64_t sim_seed =
        RngStream::derive(static_cast<std::uint64_t>(
                              std::stoull(run_cfg.get_string("run.seed", "0"))),
                          "calibrate/sim")
            .next_u64();
    for (const auto& seq : seqs) {
      auto r = rollout_sim(seq, recovered, scenario.gains, scenario.plant, scenario.policy,
                           scenario.sim_rollouts, sim_seed, scenario.curve());
      std::move(r.begin(), r.end(), std::back_inserter(sims));
    }
    Eigen::Index hw_rows = 0, sim_rows = 0;
    for (const auto& r : hardware) hw_rows += r.steps();
    for (const auto& r : sims) sim_rows += r.steps();
    FeatureMatrix hw_f(hw_rows, kNumFeatures), sim_f(sim_rows, kNumFeatures);
    Eigen::Index at = 0;
    for (const auto& r : hardware) {
      hw_f.middleRows(at, r.steps()) = extract_features(r, scenario.gains);
      at += r.steps();
    }
    at = 0;
    for (const auto& r : sims) {
      sim_f.middleRows(at, r.steps()) = extract_features(r, scenario.gains);
      at += r.steps();
    }
    const std::string path = (fs::path(out_dir) / "feature_histograms.svg").string();
    write_histogram_svg(hw_f, sim_f, histogram_bins, path);
    outputs.push_back(path);
  }
  return outputs;
}

NoiseModel noise_estimate(const std::string& rollout_csv) {
  const Rollout r = load_rollout(rollout_csv);
  const double f_s = 1.0 / r.dt;
  NoiseModel model;
  model.f_s = f_s;
  model.sigma.resize(2 * kNumJoints);
  std::vector<double> column(r.steps());
  for (int j = 0; j < kNumJoints; ++j) {
    Eigen::Map<Eigen::VectorXd>(column.data(), r.steps()) = r.q.col(j);
    model.channels.push_back("q_" + std::to_string(j));
    model.sigma[j] = estimate_sigma(column, f_s);
  }
  for (int j = 0; j < kNumJoints; ++j) {
    Eigen::Map<Eigen::VectorXd>(column.data(), r.steps()) = r.q_dot.col(j);
    model.channels.push_back("qd_" + std::to_string(j));
    model.sigma[kNumJoints + j] = estimate_sigma(column, f_s);
  }
  model.validate();
  return model;
}

}  // namespace simcal
