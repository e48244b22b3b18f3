#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "simcal/common.hpp"
#include "simcal/rng.hpp"

namespace simcal {

// Per-channel Gaussian observation-noise model. Channels follow the raw
// observation layout: q_0..q_11 then qd_0..qd_11.
struct NoiseModel {
  std::vector<std::string> channels;
  Eigen::VectorXd sigma;
  double f_s = 50.0;  // sampling rate the sigmas were estimated at

  void validate() const;
  static NoiseModel zero();
  // Uniform sigma per channel group (positions, velocities).
  static NoiseModel uniform(double sigma_q, double sigma_qd, double f_s = 50.0);

  static NoiseModel from_csv(const std::string& path);
  void write_csv(const std::string& path) const;
};

// Time-domain noise std estimated from the upper half of the spectrum:
// remove the mean, take the DFT, weight each bin magnitude by its frequency
// (flat-energy normalization), and average the weighted power over
// [f_s/4, f_s/2]. The scale factor is chosen so white noise of std sigma
// returns sigma; content below f_s/4 (e.g. gait motion) is excluded.
// Signals are truncated to the largest power of two.
double estimate_sigma(std::span<const double> signal, double f_s);

// obs + N(0, sigma_i) per channel, deterministic for a given stream/seed.
Eigen::VectorXd corrupt(const Eigen::VectorXd& obs, const NoiseModel& model, RngStream& rng);
Eigen::VectorXd corrupt(const Eigen::VectorXd& obs, const NoiseModel& model, std::uint64_t seed);

}  // namespace simcal
