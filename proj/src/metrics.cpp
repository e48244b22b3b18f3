#include "simcal/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "simcal/csv.hpp"

namespace simcal {

double wasserstein_1d(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw SchemaError("wasserstein_1d: inputs must be non-empty");
  std::vector<double> sa(a.begin(), a.end());
  std::vector<double> sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  if (sa.size() == sb.size()) {
    double sum = 0.0;
    for (size_t i = 0; i < sa.size(); ++i) sum += std::abs(sa[i] - sb[i]);
    return sum / static_cast<double>(sa.size());
  }
  // Integrate |F_a - F_b| between consecutive points of the pooled support.
  const double na = static_cast<double>(sa.size());
  const double nb = static_cast<double>(sb.size());
  size_t ia = 0, ib = 0;
  double prev = std::min(sa[0], sb[0]);
  double total = 0.0;
  while (ia < sa.size() || ib < sb.size()) {
    const double x = (ib >= sb.size() || (ia < sa.size() && sa[ia] <= sb[ib])) ? sa[ia] : sb[ib];
    total += std::abs(ia / na - ib / nb) * (x - prev);
    prev = x;
    while (ia < sa.size() && sa[ia] == x) ++ia;
    while (ib < sb.size() && sb[ib] == x) ++ib;
  }
  return total;
}

double wasserstein_features(const FeatureMatrix& a, const FeatureMatrix& b) {
  if (a.cols() != b.cols())
    throw SchemaError("wasserstein_features: column counts differ (" + std::to_string(a.cols()) +
                      " vs " + std::to_string(b.cols()) + ")");
  if (a.rows() == 0 || b.rows() == 0)
    throw SchemaError("wasserstein_features: inputs must be non-empty");
  double sum = 0.0;
  std::vector<double> ca(a.rows()), cb(b.rows());
  for (Eigen::Index c = 0; c < a.cols(); ++c) {
    Eigen::Map<Eigen::VectorXd>(ca.data(), a.rows()) = a.col(c);
    Eigen::Map<Eigen::VectorXd>(cb.data(), b.rows()) = b.col(c);
    sum += wasserstein_1d(ca, cb);
  }
  return sum / static_cast<double>(a.cols());
}

namespace {

// |x_i - y_j|^2 for all row pairs via the expansion |x|^2 + |y|^2 - 2 x.y.
Eigen::MatrixXd squared_distances(const FeatureMatrix& x, const FeatureMatrix& y) {
  const Eigen::VectorXd xs = x.rowwise().squaredNorm();
  const Eigen::VectorXd ys = y.rowwise().squaredNorm();
  Eigen::MatrixXd d = -2.0 * (x * y.transpose());
  d.colwise() += xs;
  d.rowwise() += ys.transpose();
  return d.cwiseMax(0.0);
}

double offdiag_kernel_mean(const FeatureMatrix& x, double gamma) {
  const Eigen::Index n = x.rows();
  const Eigen::MatrixXd d = squared_distances(x, x);
  const double total = (-gamma * d.array()).exp().sum() - static_cast<double>(n);
  return total / (static_cast<double>(n) * static_cast<double>(n - 1));
}

}  // namespace

double mmd(const FeatureMatrix& a, const FeatureMatrix& b, double bandwidth) {
  if (bandwidth <= 0) throw ConfigError("mmd: bandwidth must be positive");
  if (a.rows() < 2 || b.rows() < 2)
    throw SchemaError("mmd: each sample needs at least 2 rows");
  if (a.cols() != b.cols())
    throw SchemaError("mmd: column counts differ (" + std::to_string(a.cols()) + " vs " +
                      std::to_string(b.cols()) + ")");
  const double gamma = 1.0 / (2.0 * bandwidth * bandwidth);
  const double within_a = offdiag_kernel_mean(a, gamma);
  const double within_b = offdiag_kernel_mean(b, gamma);
  const Eigen::MatrixXd dab = squared_distances(a, b);
  const double cross =
      (-gamma * dab.array()).exp().sum() / static_cast<double>(a.rows() * b.rows());
  return within_a + within_b - 2.0 * cross;
}

double median_heuristic(const FeatureMatrix& a, const FeatureMatrix& b) {
  if (a.cols() != b.cols()) throw SchemaError("median_heuristic: column counts differ");
  const Eigen::Index total = a.rows() + b.rows();
  if (total < 2) throw SchemaError("median_heuristic: need at least 2 pooled rows");
  constexpr Eigen::Index kMaxRows = 2000;
  const Eigen::Index stride = (total + kMaxRows - 1) / kMaxRows;
  FeatureMatrix pooled((total + stride - 1) / stride, a.cols());
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < total; i += stride)
    pooled.row(r++) = i < a.rows() ? a.row(i) : b.row(i - a.rows());
  const Eigen::Index n = pooled.rows();
  std::vector<double> dist;
  dist.reserve(static_cast<size_t>(n) * (n - 1) / 2);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      dist.push_back((pooled.row(i) - pooled.row(j)).norm());
  const size_t mid = dist.size() / 2;
  std::nth_element(dist.begin(), dist.begin() + mid, dist.end());
  double median = dist[mid];
  if (dist.size() % 2 == 0) {
    // Lower neighbor is the max of the first half.
    const double lower = *std::max_element(dist.begin(), dist.begin() + mid);
    median = 0.5 * (median + lower);
  }
  return std::max(median, 1e-9);
}

void ScoreWeights::validate() const {
  if (w_wasserstein < 0 || w_mmd < 0) throw ConfigError("measure weights must be nonnegative");
  if (std::abs(w_wasserstein + w_mmd - 1.0) > 1e-9)
    throw ConfigError("measure weights must sum to 1");
  if (wasserstein_ref <= 0 || mmd_ref <= 0)
    throw ConfigError("measure normalization constants must be positive");
  for (const auto& [id, w] : sequence)
    if (w < 0) throw ConfigError("sequence weight for " + id + " must be nonnegative");
}

ScoreReport aggregate_pair_scores(std::vector<PairScore> pairs, const ScoreWeights& weights) {
  weights.validate();
  if (pairs.empty()) throw SchemaError("no hardware/simulation pairs to score");
  ScoreReport report;
  report.weights = weights;
  report.per_pair = std::move(pairs);

  std::map<std::string, SequenceScore> by_seq;
  for (const auto& p : report.per_pair) {
    auto& s = by_seq[p.sequence_id];
    s.sequence_id = p.sequence_id;
    s.wasserstein += p.wasserstein;
    s.mmd += p.mmd;
    s.pairs += 1;
  }
  double weight_total = 0.0;
  for (auto& [id, s] : by_seq) {
    s.wasserstein /= s.pairs;
    s.mmd /= s.pairs;
    report.per_sequence.push_back(s);
    if (!weights.sequence.empty()) {
      const auto it = weights.sequence.find(id);
      if (it == weights.sequence.end())
        throw ConfigError("no sequence weight configured for " + id);
      weight_total += it->second;
    }
  }
  if (weights.sequence.empty()) weight_total = static_cast<double>(by_seq.size());
  if (weight_total <= 0) throw ConfigError("sequence weights sum to zero");

  double combined = 0.0;
  for (const auto& s : report.per_sequence) {
    const double w_seq =
        (weights.sequence.empty() ? 1.0 : weights.sequence.at(s.sequence_id)) / weight_total;
    const double mmd_clamped = std::max(s.mmd, 0.0);  // unbiased estimator may dip below 0
    combined += w_seq * (weights.w_wasserstein * s.wasserstein / weights.wasserstein_ref +
                         weights.w_mmd * mmd_clamped / weights.mmd_ref);
  }
  report.combined = combined;
  return report;
}

ScoreReport similarity_score(const std::vector<Rollout>& hardware,
                             const std::vector<Rollout>& simulated, const GainConfig& gains,
                             const ScoreWeights& weights) {
  if (hardware.empty()) throw SchemaError("similarity_score: no hardware rollouts");
  if (simulated.empty()) throw SchemaError("similarity_score: no simulated rollouts");
  for (const auto& h : hardware)
    if (h.source != Source::Hardware)
      throw SchemaError("similarity_score: rollout in hardware list has source=simulated");

  std::set<std::string> hw_ids;
  for (const auto& h : hardware) hw_ids.insert(h.sequence_id);
  std::set<std::string> missing;
  for (const auto& s : simulated)
    if (!hw_ids.count(s.sequence_id)) missing.insert(s.sequence_id);
  if (!missing.empty()) {
    std::string ids;
    for (const auto& m : missing) ids += (ids.empty() ? "" : ", ") + m;
    throw SchemaError("similarity_score: no hardware coverage for sequence ids: " + ids);
  }

  // Precompute features once per rollout.
  std::vector<FeatureMatrix> hw_features(hardware.size());
  for (size_t i = 0; i < hardware.size(); ++i) hw_features[i] = extract_features(hardware[i], gains);

  std::vector<PairScore> pairs;
  for (const auto& sim : simulated) {
    const FeatureMatrix sim_f = extract_features(sim, gains);
    for (size_t i = 0; i < hardware.size(); ++i) {
      if (hardware[i].sequence_id != sim.sequence_id) continue;
      PairScore p;
      p.sequence_id = sim.sequence_id;
      p.hardware_repeat = hardware[i].repeat_index;
      p.sim_index = sim.repeat_index;
      p.bandwidth = median_heuristic(hw_features[i], sim_f);
      p.wasserstein = wasserstein_features(hw_features[i], sim_f);
      p.mmd = mmd(hw_features[i], sim_f, p.bandwidth);
      pairs.push_back(std::move(p));
    }
  }
  return aggregate_pair_scores(std::move(pairs), weights);
}

void ScoreReport::write_csv(const std::string& path) const {
  CsvWriter w(path);
  w.metadata("combined", format_double(combined));
  w.metadata("w_wasserstein", format_double(weights.w_wasserstein));
  w.metadata("w_mmd", format_double(weights.w_mmd));
  w.metadata("wasserstein_ref", format_double(weights.wasserstein_ref));
  w.metadata("mmd_ref", format_double(weights.mmd_ref));
  w.header({"sequence_id", "hardware_repeat", "sim_index", "wasserstein", "mmd", "bandwidth"});
  for (const auto& p : per_pair) {
    w.row(p.sequence_id, {static_cast<double>(p.hardware_repeat),
                          static_cast<double>(p.sim_index), p.wasserstein, p.mmd, p.bandwidth});
  }
  w.close();
}

std::string ScoreReport::summary() const {
  std::ostringstream out;
  out << "similarity score\n";
  out << "  pairs scored: " << per_pair.size() << "\n";
  for (const auto& s : per_sequence) {
    out << "  " << s.sequence_id << ": wasserstein=" << format_double(s.wasserstein)
        << " mmd=" << format_double(s.mmd) << " (" << s.pairs << " pairs)\n";
  }
  out << "  measure weights: W=" << format_double(weights.w_wasserstein)
      << " MMD=" << format_double(weights.w_mmd) << "\n";
  out << "  normalization: W_ref=" << format_double(weights.wasserstein_ref)
      << " MMD_ref=" << format_double(weights.mmd_ref) << "\n";
  out << "  combined = " << format_double(combined) << "\n";
  return out.str();
}

}  // namespace simcal
