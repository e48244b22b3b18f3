#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "simcal/common.hpp"
#include "simcal/config.hpp"

namespace simcal {

// Control-law gains and timing. Defaults follow the deployed controller:
// 50 Hz policy, 200 Hz torque loop, 5 ms action delay.
struct GainConfig {
  double k_p = 60.0;      // N*m/rad
  double k_d = 1.5;       // N*m*s/rad
  double sigma_a = 0.2;   // action scaling, dimensionless
  double f_policy = 50.0;   // Hz
  double f_torque = 200.0;  // Hz
  double delay_ms = 5.0;

  int substeps() const;     // torque substeps per policy step
  int delay_steps() const;  // delay depth in torque-rate steps
  void validate() const;

  static GainConfig from_config(const Config& cfg, const std::string& prefix = "gains");
  void to_config(Config& cfg, const std::string& prefix = "gains") const;
};

// The 8 calibration hyperparameters: one friction value shared by both hip
// joints, one for the knees, and a 6-parameter torque-speed envelope.
// Defaults are the calibrated reference values used by the synthetic
// hardware generator.
struct ActuatorParams {
  double friction_hip = 0.008;   // N*m, >= 0
  double friction_knee = 0.180;  // N*m, >= 0
  double tau_max = 97.0;         // N*m, > 0
  double tau_min = -108.79;      // N*m, < 0
  double omega_max = 25.03;      // rad/s, > 0
  double omega_min = -22.22;     // rad/s, < 0
  double intersect_pos = 9.48;   // rad/s, in (0, omega_max)
  double intersect_neg = -8.32;  // rad/s, in (omega_min, 0)

  void validate() const;
  double friction_for_joint(int joint) const {
    return is_knee(joint) ? friction_knee : friction_hip;
  }

  static const std::vector<std::string>& names();
  Eigen::VectorXd as_vector() const;  // in names() order
  static ActuatorParams from_vector(const Eigen::VectorXd& v);

  static ActuatorParams from_config(const Config& cfg, const std::string& prefix = "params");
  void to_config(Config& cfg, const std::string& prefix = "params") const;
};

// Piecewise-linear torque limits as a function of joint position. Absent by
// default; supplied as a 3-column CSV (q, tau_hi, tau_lo) when available.
struct TorquePositionCurve {
  struct Breakpoint {
    double q;
    double tau_hi;
    double tau_lo;
  };
  std::vector<Breakpoint> points;  // sorted by q

  void validate() const;
  // Linear interpolation between breakpoints, clamped to the end values
  // outside the covered range.
  std::pair<double, double> limits_at(double q) const;

  static TorquePositionCurve from_csv(const std::string& path);
  void write_csv(const std::string& path) const;
};

// FIFO of pending action vectors modeling the command transport delay.
// pop returns the action pushed exactly `depth` pushes earlier; the queue
// starts filled with zero actions. depth 0 is a passthrough.
class DelayBuffer {
 public:
  explicit DelayBuffer(int depth, int size = kNumJoints);

  Eigen::VectorXd push_pop(const Eigen::VectorXd& action);
  int depth() const { return static_cast<int>(slots_.size()); }
  void reset();

 private:
  std::vector<Eigen::VectorXd> slots_;
  size_t next_ = 0;
  int size_;
};

// tau_j = k_p * (sigma_a * a_j + q_default_j - q_j) - k_d * qdot_j, unclamped.
Eigen::VectorXd pd_torque(const Eigen::VectorXd& action, const Eigen::VectorXd& q,
                          const Eigen::VectorXd& q_dot, const Eigen::VectorXd& q_default,
                          const GainConfig& gains);

// Torque-speed envelope at speed omega. The upper limit holds tau_max up to
// intersect_pos, tapers linearly to zero at omega_max, and stays zero beyond;
// the lower limit mirrors this through quadrant 3.
std::pair<double, double> torque_speed_limit(double omega, const ActuatorParams& p);

// Clamp tau to the intersection of the torque-speed envelope and the
// torque-position curve (unbounded when absent).
double apply_limits(double tau, double q, double omega, const ActuatorParams& p,
                    const TorquePositionCurve* pos_curve = nullptr);

// Coulomb friction: -coulomb * sign(q_dot), zero at rest.
double friction_torque(double q_dot, double coulomb);

}  // namespace simcal
