#include "simcal/rollout.hpp"

#include <algorithm>
#include <cmath>

#include "simcal/csv.hpp"
#include "simcal/rng.hpp"

namespace simcal {

void CommandSequence::validate() const {
  if (samples.empty()) throw SchemaError("command sequence is empty");
  if (f_policy <= 0) throw ConfigError("f_policy must be positive");
  const double dt = 1.0 / f_policy;
  for (size_t k = 1; k < samples.size(); ++k) {
    if (std::abs(samples[k].t - samples[k - 1].t - dt) > 1e-9)
      throw SchemaError("command samples are not uniformly spaced at 1/f_policy");
  }
}

CommandGenSpec CommandGenSpec::from_config(const Config& cfg, const std::string& prefix) {
  CommandGenSpec s;
  s.f_policy_hz = cfg.get_double(prefix + ".f_policy_hz", s.f_policy_hz);
  s.duration_s = cfg.get_double(prefix + ".duration_s", s.duration_s);
  s.resample_interval_s = cfg.get_double(prefix + ".resample_interval_s", s.resample_interval_s);
  return s;
}

void CommandGenSpec::to_config(Config& cfg, const std::string& prefix) const {
  cfg.set(prefix + ".f_policy_hz", f_policy_hz);
  cfg.set(prefix + ".duration_s", duration_s);
  cfg.set(prefix + ".resample_interval_s", resample_interval_s);
}

namespace {

CommandSequence blank_sequence(const std::string& id, const CommandGenSpec& spec) {
  CommandSequence seq;
  seq.id = id;
  seq.f_policy = spec.f_policy_hz;
  const int n = static_cast<int>(std::lround(spec.duration_s * spec.f_policy_hz));
  seq.samples.resize(n);
  for (int k = 0; k < n; ++k) seq.samples[k].t = k / spec.f_policy_hz;
  return seq;
}

CommandSequence gen_forward_run(const CommandGenSpec& spec) {
  // Ramp to 4 m/s over the first 40% of the sequence, hold after.
  CommandSequence seq = blank_sequence("forward_run", spec);
  const double ramp_end = 0.4 * spec.duration_s;
  for (auto& s : seq.samples)
    s.v_x = s.t < ramp_end ? 4.0 * s.t / ramp_end : 4.0;
  return seq;
}

CommandSequence gen_six_direction(const CommandGenSpec& spec) {
  // Six equal blocks, one per signed command axis; each block is 60% active
  // at 1.5 magnitude followed by a zero-command gap.
  CommandSequence seq = blank_sequence("six_direction", spec);
  const double block = spec.duration_s / 6.0;
  for (auto& s : seq.samples) {
    const int b = std::min(5, static_cast<int>(s.t / block));
    const double phase = (s.t - b * block) / block;
    if (phase >= 0.6) continue;
    const double m = 1.5;
    switch (b) {
      case 0: s.v_x = m; break;
      case 1: s.v_x = -m; break;
      case 2: s.v_y = m; break;
      case 3: s.v_y = -m; break;
      case 4: s.omega_z = m; break;
      case 5: s.omega_z = -m; break;
    }
  }
  return seq;
}

CommandSequence gen_randomized(const CommandGenSpec& spec, std::uint64_t seed) {
  CommandSequence seq = blank_sequence("randomized", spec);
  RngStream rng = RngStream::derive(seed, "commands/randomized");
  double v_x = 0, v_y = 0, w_z = 0;
  int segment = -1;
  for (auto& s : seq.samples) {
    const int seg = static_cast<int>(s.t / spec.resample_interval_s);
    if (seg != segment) {
      segment = seg;
      v_x = rng.uniform(kCmdVxMin, kCmdVxMax);
      v_y = rng.uniform(kCmdVyMin, kCmdVyMax);
      w_z = rng.uniform(kCmdWzMin, kCmdWzMax);
    }
    s.v_x = v_x;
    s.v_y = v_y;
    s.omega_z = w_z;
  }
  return seq;
}

CommandSequence gen_user(const CommandGenSpec& spec) {
  // Fixed script mixing runs, strafes, and turns; phases scale with the
  // configured duration so the sequence length stays consistent.
  CommandSequence seq = blank_sequence("user", spec);
  for (auto& s : seq.samples) {
    const double u = s.t / spec.duration_s;  // [0, 1)
    if (u < 0.15) {
      s.v_x = 2.0 * u / 0.15;
    } else if (u < 0.30) {
      s.v_x = 2.0;
      s.v_y = 1.0;
    } else if (u < 0.45) {
      s.v_x = 3.0;
      s.omega_z = 0.8;
    } else if (u < 0.55) {
      s.v_x = -1.0;
    } else if (u < 0.70) {
      s.omega_z = -1.5;
    } else if (u < 0.90) {
      s.v_x = 4.0;
    } else {
      s.v_x = 4.0 * (1.0 - u) / 0.10;
    }
  }
  return seq;
}

}  // namespace

std::vector<CommandSequence> gen_command_sequences(const CommandGenSpec& spec,
                                                   std::uint64_t seed) {
  if (spec.duration_s <= 0) throw ConfigError("command duration must be positive");
  if (spec.f_policy_hz <= 0) throw ConfigError("f_policy_hz must be positive");
  if (spec.resample_interval_s <= 0) throw ConfigError("resample interval must be positive");
  return {gen_forward_run(spec), gen_six_direction(spec), gen_randomized(spec, seed),
          gen_user(spec)};
}

void save_command_sequence(const CommandSequence& seq, const std::string& path) {
  seq.validate();
  CsvWriter w(path);
  w.metadata("id", seq.id);
  w.metadata("f_policy_hz", format_double(seq.f_policy));
  w.header({"t", "v_x", "v_y", "omega_z"});
  for (const auto& s : seq.samples) w.row({s.t, s.v_x, s.v_y, s.omega_z});
  w.close();
}

CommandSequence load_command_sequence(const std::string& path) {
  const CsvTable table = read_csv(path);
  CommandSequence seq;
  const auto it = table.metadata.find("id");
  if (it == table.metadata.end()) throw SchemaError(path + ": missing `# id=` metadata");
  seq.id = it->second;
  const auto fp = table.metadata.find("f_policy_hz");
  if (fp == table.metadata.end()) throw SchemaError(path + ": missing `# f_policy_hz=` metadata");
  seq.f_policy = std::strtod(fp->second.c_str(), nullptr);
  const int ct = table.require_column("t");
  const int cx = table.require_column("v_x");
  const int cy = table.require_column("v_y");
  const int cz = table.require_column("omega_z");
  for (const auto& row : table.rows)
    seq.samples.push_back({row[ct], row[cx], row[cy], row[cz]});
  seq.validate();
  return seq;
}

std::string to_string(Source s) { return s == Source::Hardware ? "hardware" : "simulated"; }

Source source_from_string(const std::string& s) {
  if (s == "hardware") return Source::Hardware;
  if (s == "simulated") return Source::Simulated;
  throw SchemaError("unknown rollout source: " + s);
}

void Rollout::validate() const {
  const int n = steps();
  if (n == 0) throw SchemaError("rollout has no steps");
  if (q.cols() != kNumJoints || q_dot.cols() != kNumJoints || action.cols() != kNumJoints)
    throw SchemaError("rollout joint arrays must have exactly 12 columns");
  if (q_dot.rows() != n || action.rows() != n || command.rows() != n || t.size() != n)
    throw SchemaError("rollout arrays must have one row per step");
  if (command.cols() != 3) throw SchemaError("rollout command must have 3 columns");
  if (has_tau() && (tau.rows() != n || tau.cols() != kNumJoints))
    throw SchemaError("rollout tau must be steps x 12 when present");
  if (dt <= 0) throw SchemaError("rollout dt must be positive");
}

bool Rollout::operator==(const Rollout& other) const {
  return sequence_id == other.sequence_id && source == other.source &&
         repeat_index == other.repeat_index && dt == other.dt && t == other.t &&
         q == other.q && q_dot == other.q_dot && action == other.action &&
         command == other.command && has_tau() == other.has_tau() &&
         (!has_tau() || tau == other.tau);
}

void save_rollout(const Rollout& r, const std::string& path) {
  r.validate();
  CsvWriter w(path);
  w.metadata("sequence_id", r.sequence_id);
  w.metadata("source", to_string(r.source));
  w.metadata("repeat_index", std::to_string(r.repeat_index));
  w.metadata("dt", format_double(r.dt));
  std::vector<std::string> names = {"t"};
  for (int j = 0; j < kNumJoints; ++j) names.push_back("q_" + std::to_string(j));
  for (int j = 0; j < kNumJoints; ++j) names.push_back("qd_" + std::to_string(j));
  for (int j = 0; j < kNumJoints; ++j) names.push_back("a_" + std::to_string(j));
  names.insert(names.end(), {"cmd_vx", "cmd_vy", "cmd_wz"});
  if (r.has_tau())
    for (int j = 0; j < kNumJoints; ++j) names.push_back("tau_" + std::to_string(j));
  w.header(names);
  std::vector<double> row;
  for (int k = 0; k < r.steps(); ++k) {
    row.clear();
    row.push_back(r.t[k]);
    for (int j = 0; j < kNumJoints; ++j) row.push_back(r.q(k, j));
    for (int j = 0; j < kNumJoints; ++j) row.push_back(r.q_dot(k, j));
    for (int j = 0; j < kNumJoints; ++j) row.push_back(r.action(k, j));
    for (int c = 0; c < 3; ++c) row.push_back(r.command(k, c));
    if (r.has_tau())
      for (int j = 0; j < kNumJoints; ++j) row.push_back(r.tau(k, j));
    w.row(row);
  }
  w.close();
}

Rollout load_rollout(const std::string& path) {
  const CsvTable table = read_csv(path);
  Rollout r;
  const auto meta = [&](const char* key) {
    const auto it = table.metadata.find(key);
    if (it == table.metadata.end())
      throw SchemaError(path + ": missing `# " + std::string(key) + "=` metadata");
    return it->second;
  };
  r.sequence_id = meta("sequence_id");
  r.source = source_from_string(meta("source"));
  r.repeat_index = std::atoi(meta("repeat_index").c_str());
  r.dt = std::strtod(meta("dt").c_str(), nullptr);

  // Schema check: exactly 12 joint columns per block.
  for (const char* block : {"q_", "qd_", "a_"}) {
    int count = 0;
    for (const auto& h : table.header)
      if (h.rfind(block, 0) == 0) ++count;
    if (count != kNumJoints)
      throw SchemaError(path + ": expected 12 `" + std::string(block) + "j` columns, found " +
                        std::to_string(count));
  }
  int tau_count = 0;
  for (const auto& h : table.header)
    if (h.rfind("tau_", 0) == 0) ++tau_count;
  if (tau_count != 0 && tau_count != kNumJoints)
    throw SchemaError(path + ": expected 0 or 12 `tau_j` columns, found " +
                      std::to_string(tau_count));

  const int n = static_cast<int>(table.rows.size());
  if (n == 0) throw SchemaError(path + ": rollout has no steps");
  const int ct = table.require_column("t");
  r.t.resize(n);
  r.q.resize(n, kNumJoints);
  r.q_dot.resize(n, kNumJoints);
  r.action.resize(n, kNumJoints);
  r.command.resize(n, 3);
  if (tau_count > 0) r.tau.resize(n, kNumJoints);
  std::vector<int> cq(kNumJoints), cqd(kNumJoints), ca(kNumJoints), ctau(kNumJoints);
  for (int j = 0; j < kNumJoints; ++j) {
    cq[j] = table.require_column("q_" + std::to_string(j));
    cqd[j] = table.require_column("qd_" + std::to_string(j));
    ca[j] = table.require_column("a_" + std::to_string(j));
    if (tau_count > 0) ctau[j] = table.require_column("tau_" + std::to_string(j));
  }
  const int cvx = table.require_column("cmd_vx");
  const int cvy = table.require_column("cmd_vy");
  const int cwz = table.require_column("cmd_wz");
  for (int k = 0; k < n; ++k) {
    const auto& row = table.rows[k];
    r.t[k] = row[ct];
    for (int j = 0; j < kNumJoints; ++j) {
      r.q(k, j) = row[cq[j]];
      r.q_dot(k, j) = row[cqd[j]];
      r.action(k, j) = row[ca[j]];
      if (tau_count > 0) r.tau(k, j) = row[ctau[j]];
    }
    r.command(k, 0) = row[cvx];
    r.command(k, 1) = row[cvy];
    r.command(k, 2) = row[cwz];
  }
  r.validate();
  return r;
}

FeatureMatrix extract_features(const Rollout& r, const GainConfig& gains) {
  r.validate();
  gains.validate();
  const int n = r.steps();
  FeatureMatrix f(n, kNumFeatures);
  f.block(0, 0, n, kNumJoints) = gains.k_p * r.q;
  f.block(0, kNumJoints, n, kNumJoints) = gains.k_d * r.q_dot;
  f.block(0, 2 * kNumJoints, n, kNumJoints) = gains.sigma_a * gains.k_p * r.action;
  return f;
}

std::vector<std::string> feature_names() {
  std::vector<std::string> names;
  for (int j = 0; j < kNumJoints; ++j) names.push_back("q_" + std::to_string(j));
  for (int j = 0; j < kNumJoints; ++j) names.push_back("qd_" + std::to_string(j));
  for (int j = 0; j < kNumJoints; ++j) names.push_back("a_" + std::to_string(j));
  return names;
}

}  // namespace simcal
