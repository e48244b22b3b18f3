#pragma once

#include <Eigen/Dense>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "simcal/rollout.hpp"

namespace simcal {

// Empirical 1-D W1 distance. Equal-length inputs reduce to the mean absolute
// difference of sorted samples; unequal lengths integrate the gap between
// the empirical CDFs, which is the quantile-function integral for p = 1.
double wasserstein_1d(std::span<const double> a, std::span<const double> b);

// Mean of wasserstein_1d over each feature column; rows are treated as
// i.i.d. samples, time order is deliberately ignored.
double wasserstein_features(const FeatureMatrix& a, const FeatureMatrix& b);

// Unbiased squared-MMD estimator with Gaussian RBF kernel
// k(x, y) = exp(-|x - y|^2 / (2 bandwidth^2)). The estimator can be slightly
// negative; the raw value is returned and only clamped during aggregation.
double mmd(const FeatureMatrix& a, const FeatureMatrix& b, double bandwidth);

// Median pairwise Euclidean distance over the pooled rows, subsampled to at
// most 2000 rows by deterministic stride. Floors at 1e-9 when degenerate.
double median_heuristic(const FeatureMatrix& a, const FeatureMatrix& b);

struct ScoreWeights {
  // Per-sequence weights; empty means uniform over the sequences present.
  // Non-empty weights are normalized to sum 1 over the sequences scored.
  std::map<std::string, double> sequence;
  double w_wasserstein = 0.5;
  double w_mmd = 0.5;
  // Normalization constants making the two measures commensurate; the
  // calibration loop sets these to the measures' values at its first
  // iterate so the initial combined score is 1.
  double wasserstein_ref = 1.0;
  double mmd_ref = 1.0;

  void validate() const;
};

struct PairScore {
  std::string sequence_id;
  int hardware_repeat = 0;
  int sim_index = 0;
  double wasserstein = 0.0;
  double mmd = 0.0;
  double bandwidth = 0.0;
};

struct SequenceScore {
  std::string sequence_id;
  double wasserstein = 0.0;  // mean over pairs
  double mmd = 0.0;          // mean over pairs, raw (may be negative)
  int pairs = 0;
};

struct ScoreReport {
  std::vector<PairScore> per_pair;
  std::vector<SequenceScore> per_sequence;
  double combined = 0.0;
  ScoreWeights weights;

  void write_csv(const std::string& path) const;
  std::string summary() const;
};

// Pairs every simulated rollout with every hardware rollout sharing its
// sequence id, computes both measures per pair (bandwidth from the pooled
// pair), averages within sequences, and combines:
//   combined = sum_seq w_seq (w_W * Wbar_seq / W_ref + w_M * max(MMDbar_seq, 0) / M_ref)
ScoreReport similarity_score(const std::vector<Rollout>& hardware,
                             const std::vector<Rollout>& simulated, const GainConfig& gains,
                             const ScoreWeights& weights = {});

// Aggregation used by similarity_score, exposed so a report can recombine
// stored pair tables without recomputing distances.
ScoreReport aggregate_pair_scores(std::vector<PairScore> pairs, const ScoreWeights& weights);

}  // namespace simcal
