#include "simcal/noise.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>

#include "simcal/csv.hpp"

namespace simcal {

void NoiseModel::validate() const {
  if (sigma.size() != static_cast<Eigen::Index>(channels.size()))
    throw SchemaError("noise model: channel/sigma count mismatch");
  if ((sigma.array() < 0).any()) throw SchemaError("noise model: sigmas must be >= 0");
  if (f_s <= 0) throw SchemaError("noise model: f_s must be positive");
}

NoiseModel NoiseModel::zero() { return uniform(0.0, 0.0); }

NoiseModel NoiseModel::uniform(double sigma_q, double sigma_qd, double f_s) {
  NoiseModel m;
  m.f_s = f_s;
  m.sigma.resize(2 * kNumJoints);
  for (int j = 0; j < kNumJoints; ++j) {
    m.channels.push_back("q_" + std::to_string(j));
    m.sigma[j] = sigma_q;
  }
  for (int j = 0; j < kNumJoints; ++j) {
    m.channels.push_back("qd_" + std::to_string(j));
    m.sigma[kNumJoints + j] = sigma_qd;
  }
  m.validate();
  return m;
}

NoiseModel NoiseModel::from_csv(const std::string& path) {
  const CsvTable table = read_csv(path, {"channel"});
  if (table.header.size() != 2 || table.header[0] != "channel" || table.header[1] != "sigma")
    throw SchemaError(path + ": expected columns `channel,sigma`");
  NoiseModel m;
  const auto fs = table.metadata.find("f_s");
  if (fs != table.metadata.end()) m.f_s = std::strtod(fs->second.c_str(), nullptr);
  m.sigma.resize(static_cast<Eigen::Index>(table.rows.size()));
  for (size_t i = 0; i < table.rows.size(); ++i) {
    m.channels.push_back(table.labels[i]);
    m.sigma[static_cast<Eigen::Index>(i)] = table.rows[i][0];
  }
  m.validate();
  return m;
}

void NoiseModel::write_csv(const std::string& path) const {
  validate();
  CsvWriter w(path);
  w.metadata("f_s", format_double(f_s));
  w.header({"channel", "sigma"});
  for (size_t i = 0; i < channels.size(); ++i) w.row(channels[i], {sigma[i]});
  w.close();
}

double estimate_sigma(std::span<const double> signal, double f_s) {
  if (f_s <= 0) throw ConfigError("estimate_sigma: f_s must be positive");
  if (signal.size() < 64)
    throw SchemaError("estimate_sigma: need at least 64 samples, got " +
                      std::to_string(signal.size()));
  // Truncate to the largest power of two; zero-padding would leak motion
  // content into the estimation band.
  size_t n = 1;
  while (n * 2 <= signal.size()) n *= 2;

  std::vector<double> x(signal.begin(), signal.begin() + n);
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(n);
  for (double& v : x) v -= mean;

  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> spectrum;
  fft.fwd(spectrum, x);

  // One-sided band [f_s/4, f_s/2]: bins k in [n/4, n/2].
  const size_t k_lo = n / 4;
  const size_t k_hi = n / 2;
  double weighted_power = 0.0;
  double weight_norm = 0.0;
  for (size_t k = k_lo; k <= k_hi; ++k) {
    const double f = f_s * static_cast<double>(k) / static_cast<double>(n);
    const double mag = std::abs(spectrum[k]);
    weighted_power += (f * mag) * (f * mag);
    weight_norm += f * f;
  }
  // For white noise of std sigma, E|X_k|^2 = n sigma^2, so dividing the
  // f-weighted power by n * sum(f^2) recovers sigma^2 exactly.
  const double sigma_sq = weighted_power / (static_cast<double>(n) * weight_norm);
  return std::sqrt(sigma_sq);
}

Eigen::VectorXd corrupt(const Eigen::VectorXd& obs, const NoiseModel& model, RngStream& rng) {
  if (obs.size() != model.sigma.size())
    throw SchemaError("corrupt: observation length " + std::to_string(obs.size()) +
                      " != channel count " + std::to_string(model.sigma.size()));
  Eigen::VectorXd out(obs.size());
  for (Eigen::Index i = 0; i < obs.size(); ++i) out[i] = obs[i] + model.sigma[i] * rng.normal();
  return out;
}

Eigen::VectorXd corrupt(const Eigen::VectorXd& obs, const NoiseModel& model, std::uint64_t seed) {
  RngStream rng = RngStream::derive(seed, "noise/corrupt");
  return corrupt(obs, model, rng);
}

}  // namespace simcal
