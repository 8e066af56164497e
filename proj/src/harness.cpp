#include "molte/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <string>
#include <thread>

#include "molte/error.hpp"
#include "molte/numeric.hpp"

namespace molte {

std::size_t budget_for(double ratio, std::size_t arms) {
  if (!(ratio > 0.0) || !std::isfinite(ratio)) throw InvalidArgument("budget ratio must be positive and finite");
  const double n = std::round(ratio * static_cast<double>(arms));
  return std::max<std::size_t>(1, static_cast<std::size_t>(n));
}

void validate_config(const ExperimentConfig& config) {
  if (config.policies.empty()) throw InvalidArgument("at least one policy is required");
  if (config.num_p == 0) throw InvalidArgument("num_p must be at least 1");
  if (config.num_truth == 0) throw InvalidArgument("num_truth must be at least 1");
  if (!(config.budget_ratio > 0.0) || !std::isfinite(config.budget_ratio)) {
    throw InvalidArgument("budget ratio must be positive and finite");
  }
  switch (config.prior_mode) {
    case PriorMode::uninformative:
      if (config.belief_mode == BeliefMode::correlated) {
        throw InvalidArgument("an uninformative prior cannot be used with correlated beliefs");
      }
      break;
    case PriorMode::default_prior:
      if (!has_default_prior(config.problem)) {
        throw InvalidArgument("problem " + problem_label(config.problem) + " has no default prior");
      }
      break;
    case PriorMode::given:
      if (!config.given_prior && !has_default_prior(config.problem)) {
        throw InvalidArgument("given prior for " + problem_label(config.problem) + " has no payload");
      }
      break;
    case PriorMode::mle:
      break;
  }
  bool tunes = false;
  for (const PolicySpec& p : config.policies) {
    if (p.directive.kind == ParamKind::none) continue;
    if (!is_tunable(p.kind)) {
      throw InvalidArgument("policy " + std::string(policy_name(p.kind)) + " has nothing to tune");
    }
    tunes = tunes || p.directive.kind == ParamKind::tune;
  }
  if (tunes) {
    if (config.num_p_tune == 0) throw InvalidArgument("num_p_tune must be at least 1");
    const TuningGrid& g = config.grid;
    if (!(g.lo > 0.0) || !(g.hi > g.lo) || g.points < 2 || g.refine_points < 2) {
      throw InvalidArgument("tuning grid needs 0 < lo < hi and at least two points");
    }
  }
}

SampleTank::SampleTank(const ProblemInstance& problem, std::uint64_t seed)
    : problem_(&problem), values_(problem.size()) {
  streams_.reserve(problem.size());
  for (std::size_t x = 0; x < problem.size(); ++x) streams_.emplace_back(derive_seed(seed, Stream::arm, {x}));
}

double SampleTank::draw(std::size_t arm, std::size_t visit) {
  if (arm >= values_.size()) throw InvalidArgument("tank arm out of range");
  std::vector<double>& column = values_[arm];
  while (column.size() <= visit) column.push_back(sample_observation(*problem_, arm, streams_[arm]));
  return column[visit];
}

std::uint64_t truth_seed(std::uint64_t master_seed, std::size_t trial, std::size_t truth) {
  return derive_seed(master_seed, Stream::evaluation, {trial, truth});
}

std::uint64_t tuning_seed(std::uint64_t master_seed, std::size_t episode) {
  return derive_seed(master_seed, Stream::tuning, {episode});
}

EpisodeSetup make_episode_setup(const ExperimentConfig& config, std::uint64_t episode_seed) {
  Rng problem_rng = make_rng(derive_seed(episode_seed, Stream::problem));
  ProblemDraw draw = make_problem(config.problem, problem_rng);
  Rng prior_rng = make_rng(derive_seed(episode_seed, Stream::prior));
  PriorSpec spec{config.prior_mode, config.given_prior, config.belief_mode};
  BuiltPrior prior = build_prior(spec, draw, prior_rng);
  return {std::move(draw), std::move(prior), derive_seed(episode_seed, Stream::tank),
          derive_seed(episode_seed, Stream::policy)};
}

EpisodeResult run_episode(const EpisodeSetup& setup, PolicyKind kind, double parameter, Objective objective,
                          std::size_t budget, SampleTank& tank, Rng& policy_rng, bool record_decisions) {
  const ProblemInstance& problem = setup.draw.instance;
  const std::size_t m = problem.size();
  std::unique_ptr<Policy> policy = make_policy(kind, parameter, {setup.prior.belief, setup.prior.beta_w, budget});

  EpisodeResult r;
  r.counts.assign(m, 0);
  if (record_decisions) r.decisions.reserve(budget);
  double online = 0.0;
  for (std::size_t n = 0; n < budget; ++n) {
    const std::size_t x = policy->choose(policy_rng);
    const double w = tank.draw(x, r.counts[x]);
    ++r.counts[x];
    policy->observe({x, w});
    online += problem.mu(static_cast<Eigen::Index>(x));
    if (record_decisions) r.decisions.push_back(x);
  }
  r.recommendation = policy->recommend();
  r.final_estimates = policy->estimates();
  const double best = problem.mu.maxCoeff();
  if (objective == Objective::offline) {
    r.objective = problem.mu(static_cast<Eigen::Index>(r.recommendation));
    r.oc = best - r.objective;
  } else {
    r.objective = online;
    r.oc = (static_cast<double>(budget) * best - online) / static_cast<double>(budget);
  }
  return r;
}

double TrialResult::mean_objective(std::size_t policy) const {
  const auto& row = episodes.at(policy);
  double s = 0.0;
  for (const auto& e : row) s += e.objective;
  return s / static_cast<double>(row.size());
}

double TrialResult::mean_oc(std::size_t policy) const {
  const auto& row = episodes.at(policy);
  double s = 0.0;
  for (const auto& e : row) s += e.oc;
  return s / static_cast<double>(row.size());
}

TrialResult run_trial(const ExperimentConfig& config, std::size_t trial_index, std::span<const double> parameters) {
  if (parameters.size() != config.policies.size()) throw InvalidArgument("one parameter per policy is required");
  TrialResult result;
  result.trial_index = trial_index;
  result.parameters.assign(parameters.begin(), parameters.end());
  result.episodes.resize(config.policies.size());
  for (std::size_t t = 0; t < config.num_truth; ++t) {
    const EpisodeSetup setup = make_episode_setup(config, truth_seed(config.master_seed, trial_index, t));
    const ProblemInstance& problem = setup.draw.instance;
    const std::size_t budget = budget_for(config.budget_ratio, problem.size());
    result.truths.push_back(
        {problem.mu, problem.mu.maxCoeff(), problem.mu.minCoeff(), budget, setup.prior.extra_observations});
    SampleTank tank(problem, setup.tank_seed);
    for (std::size_t k = 0; k < config.policies.size(); ++k) {
      Rng policy_rng = make_rng(derive_seed(setup.policy_seed, {k}));
      result.episodes[k].push_back(run_episode(setup, config.policies[k].kind, parameters[k], config.objective,
                                               budget, tank, policy_rng, config.record_decisions));
    }
  }
  return result;
}

std::size_t resolve_workers(std::size_t requested) {
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn) {
  workers = std::min(resolve_workers(workers), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex error_mutex;
  std::size_t error_index = n;
  std::exception_ptr error;
  auto worker = [&] {
    while (!failed.load()) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (i < error_index) {
          error_index = i;
          error = std::current_exception();
        }
        failed.store(true);
      }
    }
  };
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

std::vector<TrialResult> run_experiment(const ExperimentConfig& config, std::span<const double> parameters,
                                        const RunOptions& options) {
  validate_config(config);
  std::vector<TrialResult> results(config.num_p);
  std::mutex done_mutex;
  parallel_for(config.num_p, options.workers, [&](std::size_t i) {
    results[i] = run_trial(config, i, parameters);
    if (options.on_trial_done) {
      std::lock_guard lock(done_mutex);
      options.on_trial_done(results[i]);
    }
  });
  return results;
}

}  // namespace molte
