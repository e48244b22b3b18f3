#include "simcal/actuator.hpp"

#include <algorithm>
#include <cmath>

#include "simcal/csv.hpp"

namespace simcal {

int GainConfig::substeps() const {
  return static_cast<int>(std::lround(f_torque / f_policy));
}

int GainConfig::delay_steps() const {
  return static_cast<int>(std::lround(delay_ms * f_torque / 1000.0));
}

void GainConfig::validate() const {
  if (k_p <= 0 || k_d <= 0 || sigma_a <= 0) throw ConfigError("gains must be positive");
  if (f_policy <= 0 || f_torque <= 0) throw ConfigError("rates must be positive");
  const double ratio = f_torque / f_policy;
  if (std::abs(ratio - std::lround(ratio)) > 1e-9)
    throw ConfigError("f_torque must be an integer multiple of f_policy");
  if (delay_ms < 0) throw ConfigError("delay_ms must be nonnegative");
  const double steps = delay_ms * f_torque / 1000.0;
  if (std::abs(steps - std::lround(steps)) > 1e-9)
    throw ConfigError("delay_ms must be an integer number of torque-rate steps");
}

GainConfig GainConfig::from_config(const Config& cfg, const std::string& prefix) {
  GainConfig g;
  g.k_p = cfg.get_double(prefix + ".k_p", g.k_p);
  g.k_d = cfg.get_double(prefix + ".k_d", g.k_d);
  g.sigma_a = cfg.get_double(prefix + ".sigma_a", g.sigma_a);
  g.f_policy = cfg.get_double(prefix + ".f_policy", g.f_policy);
  g.f_torque = cfg.get_double(prefix + ".f_torque", g.f_torque);
  g.delay_ms = cfg.get_double(prefix + ".delay_ms", g.delay_ms);
  g.validate();
  return g;
}

void GainConfig::to_config(Config& cfg, const std::string& prefix) const {
  cfg.set(prefix + ".k_p", k_p);
  cfg.set(prefix + ".k_d", k_d);
  cfg.set(prefix + ".sigma_a", sigma_a);
  cfg.set(prefix + ".f_policy", f_policy);
  cfg.set(prefix + ".f_torque", f_torque);
  cfg.set(prefix + ".delay_ms", delay_ms);
}

void ActuatorParams::validate() const {
  if (friction_hip < 0 || friction_knee < 0) throw ConfigError("frictions must be >= 0");
  if (!(tau_min < 0 && 0 < tau_max)) throw ConfigError("need tau_min < 0 < tau_max");
  if (!(omega_min < intersect_neg && intersect_neg < 0 && 0 < intersect_pos &&
        intersect_pos < omega_max))
    throw ConfigError("need omega_min < intersect_neg < 0 < intersect_pos < omega_max");
}

const std::vector<std::string>& ActuatorParams::names() {
  static const std::vector<std::string> n = {
      "friction_hip", "friction_knee", "tau_max",       "tau_min",
      "omega_max",    "omega_min",     "intersect_pos", "intersect_neg"};
  return n;
}

Eigen::VectorXd ActuatorParams::as_vector() const {
  Eigen::VectorXd v(8);
  v << friction_hip, friction_knee, tau_max, tau_min, omega_max, omega_min, intersect_pos,
      intersect_neg;
  return v;
}

ActuatorParams ActuatorParams::from_vector(const Eigen::VectorXd& v) {
  if (v.size() != 8) throw SchemaError("actuator parameter vector must have 8 entries");
  ActuatorParams p;
  p.friction_hip = v[0];
  p.friction_knee = v[1];
  p.tau_max = v[2];
  p.tau_min = v[3];
  p.omega_max = v[4];
  p.omega_min = v[5];
  p.intersect_pos = v[6];
  p.intersect_neg = v[7];
  return p;
}

ActuatorParams ActuatorParams::from_config(const Config& cfg, const std::string& prefix) {
  ActuatorParams p;
  p.friction_hip = cfg.get_double(prefix + ".friction_hip", p.friction_hip);
  p.friction_knee = cfg.get_double(prefix + ".friction_knee", p.friction_knee);
  p.tau_max = cfg.get_double(prefix + ".tau_max", p.tau_max);
  p.tau_min = cfg.get_double(prefix + ".tau_min", p.tau_min);
  p.omega_max = cfg.get_double(prefix + ".omega_max", p.omega_max);
  p.omega_min = cfg.get_double(prefix + ".omega_min", p.omega_min);
  p.intersect_pos = cfg.get_double(prefix + ".intersect_pos", p.intersect_pos);
  p.intersect_neg = cfg.get_double(prefix + ".intersect_neg", p.intersect_neg);
  p.validate();
  return p;
}

void ActuatorParams::to_config(Config& cfg, const std::string& prefix) const {
  const auto v = as_vector();
  for (int i = 0; i < 8; ++i) cfg.set(prefix + "." + names()[i], v[i]);
}

void TorquePositionCurve::validate() const {
  if (points.empty()) throw ConfigError("torque-position curve has no breakpoints");
  for (size_t i = 0; i < points.size(); ++i) {
    if (points[i].tau_hi < points[i].tau_lo)
      throw ConfigError("torque-position curve has hi < lo at breakpoint " + std::to_string(i));
    if (i > 0 && points[i].q <= points[i - 1].q)
      throw ConfigError("torque-position breakpoints must be strictly increasing in q");
  }
}

std::pair<double, double> TorquePositionCurve::limits_at(double q) const {
  if (points.empty()) throw ConfigError("torque-position curve has no breakpoints");
  if (q <= points.front().q) return {points.front().tau_lo, points.front().tau_hi};
  if (q >= points.back().q) return {points.back().tau_lo, points.back().tau_hi};
  for (size_t i = 1; i < points.size(); ++i) {
    if (q <= points[i].q) {
      const auto& a = points[i - 1];
      const auto& b = points[i];
      const double s = (q - a.q) / (b.q - a.q);
      return {a.tau_lo + s * (b.tau_lo - a.tau_lo), a.tau_hi + s * (b.tau_hi - a.tau_hi)};
    }
  }
  return {points.back().tau_lo, points.back().tau_hi};
}

TorquePositionCurve TorquePositionCurve::from_csv(const std::string& path) {
  const CsvTable table = read_csv(path);
  const int cq = table.require_column("q");
  const int chi = table.require_column("tau_hi");
  const int clo = table.require_column("tau_lo");
  TorquePositionCurve curve;
  for (const auto& row : table.rows) curve.points.push_back({row[cq], row[chi], row[clo]});
  curve.validate();
  return curve;
}

void TorquePositionCurve::write_csv(const std::string& path) const {
  CsvWriter w(path);
  w.header({"q", "tau_hi", "tau_lo"});
  for (const auto& p : points) w.row({p.q, p.tau_hi, p.tau_lo});
  w.close();
}

DelayBuffer::DelayBuffer(int depth, int size) : size_(size) {
  if (depth < 0) throw ConfigError("delay depth must be >= 0");
  slots_.assign(static_cast<size_t>(depth), Eigen::VectorXd::Zero(size));
}

Eigen::VectorXd DelayBuffer::push_pop(const Eigen::VectorXd& action) {
  if (action.size() != size_) throw SchemaError("delay buffer action size mismatch");
  if (slots_.empty()) return action;
  Eigen::VectorXd out = std::move(slots_[next_]);
  slots_[next_] = action;
  next_ = (next_ + 1) % slots_.size();
  return out;
}

void DelayBuffer::reset() {
  for (auto& s : slots_) s.setZero();
  next_ = 0;
}

Eigen::VectorXd pd_torque(const Eigen::VectorXd& action, const Eigen::VectorXd& q,
                          const Eigen::VectorXd& q_dot, const Eigen::VectorXd& q_default,
                          const GainConfig& gains) {
  const auto n = action.size();
  if (q.size() != n || q_dot.size() != n || q_default.size() != n)
    throw SchemaError("pd_torque: input arrays must have equal length");
  return gains.k_p * (gains.sigma_a * action + q_default - q) - gains.k_d * q_dot;
}

std::pair<double, double> torque_speed_limit(double omega, const ActuatorParams& p) {
  double hi;
  if (omega <= p.intersect_pos) {
    hi = p.tau_max;
  } else if (omega >= p.omega_max) {
    hi = 0.0;
  } else {
    hi = p.tau_max * (p.omega_max - omega) / (p.omega_max - p.intersect_pos);
  }
  double lo;
  if (omega >= p.intersect_neg) {
    lo = p.tau_min;
  } else if (omega <= p.omega_min) {
    lo = 0.0;
  } else {
    lo = p.tau_min * (p.omega_min - omega) / (p.omega_min - p.intersect_neg);
  }
  return {lo, hi};
}

double apply_limits(double tau, double q, double omega, const ActuatorParams& p,
                    const TorquePositionCurve* pos_curve) {
  auto [lo, hi] = torque_speed_limit(omega, p);
  if (pos_curve != nullptr) {
    const auto [plo, phi] = pos_curve->limits_at(q);
    lo = std::max(lo, plo);
    hi = std::min(hi, phi);
  }
  if (lo > hi)
    throw ConfigError("torque limit interval is inverted: [" + format_double(lo) + ", " +
                      format_double(hi) + "]");
  return std::clamp(tau, lo, hi);
}

double friction_torque(double q_dot, double coulomb) {
  if (coulomb < 0) throw ConfigError("coulomb friction must be >= 0");
  if (q_dot > 0) return -coulomb;
  if (q_dot < 0) return coulomb;
  return 0.0;
}

}  // namespace simcal
