#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "molte/harness.hpp"

namespace molte {

/// max(mu) - mu[rec].
double offline_oc(const Eigen::VectorXd& mu, std::size_t recommendation);
/// N * max(mu) - sum of mu over the decisions.
double pseudo_regret(const Eigen::VectorXd& mu, std::span<const std::size_t> decisions);

/// One policy on one truth, as stored in objective_function.csv.
struct EpisodeRecord {
  std::size_t trial = 0;   ///< zero-based
  std::size_t truth = 0;   ///< zero-based
  std::size_t policy = 0;  ///< position in the config row
  double objective = 0.0;
  double oc = 0.0;
  std::size_t recommendation = 0;
  bool optimal = false;  ///< mu[recommendation] == max mu
  double mu_max = 0.0;
  double mu_min = 0.0;
  std::size_t budget = 0;
};

/// Rows ordered by trial, truth, then policy.
std::vector<EpisodeRecord> episode_records(std::span<const TrialResult> trials);

struct WinProbabilities {
  std::vector<double> prob_optimal;
  std::vector<double> prob_winning;
  std::vector<double> prob_outperform;
};

/// prob_optimal and prob_winning are fractions of episodes; exact OC ties
/// split the winning mass equally. prob_outperform is the fraction of
/// trials whose mean OC is strictly below the reference policy's.
WinProbabilities win_probabilities(std::span<const EpisodeRecord> records, std::size_t policies, std::size_t trials,
                                   std::size_t truths);

/// Per trial, the mean over truths of (OC_policy - OC_reference) / (max mu - min mu).
/// Positive values mean the policy did worse than the reference.
std::vector<std::vector<double>> normalized_oc_vs_reference(std::span<const EpisodeRecord> records,
                                                            std::size_t policies, std::size_t trials,
                                                            std::size_t truths, std::size_t reference = 0);

struct Histogram {
  std::vector<double> edges;                 ///< bins + 1 edges
  std::vector<std::vector<std::size_t>> counts;  ///< [series][bin]
};

/// Freedman-Diaconis bins on the pooled values, shared by every series.
Histogram shared_histogram(const std::vector<std::vector<double>>& series);

double mean(std::span<const double> v);
/// Sample standard deviation (n - 1); NaN for fewer than two values.
double sample_sd(std::span<const double> v);
/// Linear-interpolation quantile, q in [0, 1].
double quantile(std::vector<double> v, double q);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Percentile bootstrap interval for the mean.
Interval bootstrap_mean_ci(std::span<const double> v, double level, std::size_t resamples, std::uint64_t seed);

struct PolicySummary {
  std::string token;
  double parameter = 0.0;
  bool tuned = false;
  double mean_objective = 0.0;
  double mean_oc = 0.0;
  double sd_oc = 0.0;  ///< over per-trial mean OC
  double prob_optimal = 0.0;
  double prob_winning = 0.0;
  double prob_outperform = 0.0;
  double mean_normalized_oc = 0.0;
  double sd_normalized_oc = 0.0;
};

struct ComparisonReport {
  std::vector<PolicySummary> policies;
  std::vector<std::vector<double>> normalized_series;  ///< [policy][trial]
  Histogram histogram;  ///< over normalized_series of the non-reference policies
  std::size_t trials = 0;
  std::size_t truths = 0;
};

/// Builds every aggregate from episode records alone.
ComparisonReport compare(std::span<const EpisodeRecord> records, std::span<const std::string> tokens,
                         std::span<const double> parameters, const std::vector<bool>& tuned, std::size_t trials,
                         std::size_t truths);

/// Per-arm selection counts of one policy summed over the first `truths`
/// truths of a trial.
std::vector<std::size_t> sampling_pattern(const TrialResult& trial, std::size_t policy, std::size_t truths);

}  // namespace molte
