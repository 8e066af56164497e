#pragma once

#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "molte/policies.hpp"
#include "molte/prior.hpp"
#include "molte/problems.hpp"
#include "molte/rng.hpp"

namespace molte {

enum class Objective { offline, online };

/// Log-spaced brute-force search grid for tunable parameters.
struct TuningGrid {
  double lo = 1e-5;
  double hi = 1e5;
  std::size_t points = 41;
  std::size_t refine_points = 11;
};

/// One comparison row. The first policy is the reference.
struct ExperimentConfig {
  ProblemClassSpec problem;
  PriorMode prior_mode = PriorMode::uninformative;
  std::optional<PriorPayload> given_prior;
  double budget_ratio = 5.0;
  BeliefMode belief_mode = BeliefMode::independent;
  Objective objective = Objective::offline;
  std::vector<PolicySpec> policies;
  std::size_t num_p = 100;
  std::size_t num_truth = 10;
  std::size_t num_p_tune = 100;
  std::uint64_t master_seed = 0;
  TuningGrid grid;
  bool record_decisions = false;
};

/// N = max(1, round(ratio * M)).
std::size_t budget_for(double ratio, std::size_t arms);

/// Validates a config without running it (arity, positivity, tuning targets).
void validate_config(const ExperimentConfig& config);

/// Common random numbers: the k-th observation of arm x is the same value
/// for every policy. Draws are produced lazily from one stream per arm.
class SampleTank {
 public:
  SampleTank(const ProblemInstance& problem, std::uint64_t seed);

  double draw(std::size_t arm, std::size_t visit);
  std::size_t arms() const noexcept { return streams_.size(); }

 private:
  const ProblemInstance* problem_;
  std::vector<Rng> streams_;
  std::vector<std::vector<double>> values_;
};

/// One policy run through the full budget on one truth.
struct EpisodeResult {
  double objective = 0.0;  ///< offline: mu[rec]; online: sum of mu over decisions
  double oc = 0.0;         ///< offline: max mu - mu[rec]; online: pseudo-regret / N
  std::size_t recommendation = 0;
  std::vector<std::size_t> counts;
  Eigen::VectorXd final_estimates;
  std::vector<std::size_t> decisions;  ///< filled only when recording
};

struct TruthRecord {
  Eigen::VectorXd mu;
  double mu_max = 0.0;
  double mu_min = 0.0;
  std::size_t budget = 0;
  std::size_t extra_observations = 0;  ///< spent building the prior
};

struct TrialResult {
  std::size_t trial_index = 0;
  std::vector<TruthRecord> truths;
  std::vector<std::vector<EpisodeResult>> episodes;  ///< [policy][truth]
  std::vector<double> parameters;                    ///< effective parameter per policy

  double mean_objective(std::size_t policy) const;
  double mean_oc(std::size_t policy) const;
};

struct TuningResult {
  double best = 0.0;
  bool flat = false;
  std::vector<double> grid, values;
  std::vector<double> refined_grid, refined_values;
};

/// Everything an episode needs besides the policy: truth, prior and tank.
struct EpisodeSetup {
  ProblemDraw draw;
  BuiltPrior prior;
  std::uint64_t tank_seed = 0;
  std::uint64_t policy_seed = 0;
};

/// Instantiates truth and prior from a per-episode seed.
EpisodeSetup make_episode_setup(const ExperimentConfig& config, std::uint64_t episode_seed);

EpisodeResult run_episode(const EpisodeSetup& setup, PolicyKind kind, double parameter, Objective objective,
                          std::size_t budget, SampleTank& tank, Rng& policy_rng, bool record_decisions);

std::uint64_t truth_seed(std::uint64_t master_seed, std::size_t trial, std::size_t truth);
std::uint64_t tuning_seed(std::uint64_t master_seed, std::size_t episode);

/// Mean tuning objective (higher is better) of `kind` at `parameter` over
/// config.num_p_tune single-truth episodes from the tuning stream.
double tuning_objective(const ExperimentConfig& config, PolicyKind kind, double parameter);

/// Grid search plus one local refinement. Throws InvalidArgument when the
/// policy has nothing to tune.
TuningResult tune_policy(const ExperimentConfig& config, std::size_t policy_index, std::size_t workers = 1);

/// Parameter each policy runs with: default, fixed, or tuned.
std::vector<double> resolve_parameters(const ExperimentConfig& config, std::size_t workers = 1,
                                       std::vector<std::optional<TuningResult>>* tuning = nullptr);

TrialResult run_trial(const ExperimentConfig& config, std::size_t trial_index, std::span<const double> parameters);

struct RunOptions {
  std::size_t workers = 1;  ///< 0 means one per hardware thread
  /// Called once per finished trial, serialized, in completion order.
  std::function<void(const TrialResult&)> on_trial_done;
};

/// Runs num_p trials. Results are ordered by trial index and do not depend
/// on the worker count. Throws the error of the lowest failing trial.
std::vector<TrialResult> run_experiment(const ExperimentConfig& config, std::span<const double> parameters,
                                        const RunOptions& options = {});

std::size_t resolve_workers(std::size_t requested);

/// Calls fn(i) for i in [0, n) on up to `workers` threads. After all
/// threads join, rethrows the exception of the lowest failing index.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn);

}  // namespace molte
