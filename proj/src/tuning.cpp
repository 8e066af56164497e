#include <algorithm>
#include <cmath>
#include <string>

#include "molte/error.hpp"
#include "molte/harness.hpp"
#include "molte/log.hpp"
#include "molte/numeric.hpp"

namespace molte {
namespace {

std::vector<double> log_grid(double lo, double hi, std::size_t points) {
  std::vector<double> g(points);
  const double a = std::log10(lo), b = std::log10(hi);
  for (std::size_t i = 0; i < points; ++i) {
    g[i] = std::pow(10.0, a + (b - a) * static_cast<double>(i) / static_cast<double>(points - 1));
  }
  g.front() = lo;
  g.back() = hi;
  return g;
}

std::vector<double> evaluate_grid(const ExperimentConfig& config, PolicyKind kind, const std::vector<double>& grid,
                                  std::size_t workers) {
  std::vector<double> values(grid.size());
  parallel_for(grid.size(), workers, [&](std::size_t i) { values[i] = tuning_objective(config, kind, grid[i]); });
  return values;
}

}  // namespace

double tuning_objective(const ExperimentConfig& config, PolicyKind kind, double parameter) {
  double total = 0.0;
  for (std::size_t j = 0; j < config.num_p_tune; ++j) {
    const EpisodeSetup setup = make_episode_setup(config, tuning_seed(config.master_seed, j));
    const std::size_t budget = budget_for(config.budget_ratio, setup.draw.instance.size());
    SampleTank tank(setup.draw.instance, setup.tank_seed);
    Rng policy_rng = make_rng(setup.policy_seed);
    total += run_episode(setup, kind, parameter, config.objective, budget, tank, policy_rng, false).objective;
  }
  return total / static_cast<double>(config.num_p_tune);
}

TuningResult tune_policy(const ExperimentConfig& config, std::size_t policy_index, std::size_t workers) {
  const PolicyKind kind = config.policies.at(policy_index).kind;
  if (!is_tunable(kind)) throw InvalidArgument("policy " + std::string(policy_name(kind)) + " has nothing to tune");
  const TuningGrid& g = config.grid;
  if (!(g.lo > 0.0) || !(g.hi > g.lo) || g.points < 2 || g.refine_points < 2) {
    throw InvalidArgument("tuning grid needs 0 < lo < hi and at least two points");
  }
  if (config.num_p_tune == 0) throw InvalidArgument("num_p_tune must be at least 1");

  TuningResult r;
  r.grid = log_grid(g.lo, g.hi, g.points);
  r.values = evaluate_grid(config, kind, r.grid, workers);

  const bool flat = std::all_of(r.values.begin(), r.values.end(), [&](double v) { return v == r.values.front(); });
  if (flat) {
    r.flat = true;
    r.best = r.grid[(r.grid.size() - 1) / 2];
    log_warning(std::string(policy_name(kind)) + ": tuning objective is flat over the grid; using the midpoint " +
                std::to_string(r.best));
    return r;
  }
  // argmax keeps the first (smallest) parameter on ties.
  const std::size_t best = argmax(r.values);
  const double lo = r.grid[best > 0 ? best - 1 : 0];
  const double hi = r.grid[best + 1 < r.grid.size() ? best + 1 : best];
  r.refined_grid = log_grid(lo, hi, g.refine_points);
  r.refined_values = evaluate_grid(config, kind, r.refined_grid, workers);
  const std::size_t refined = argmax(r.refined_values);
  r.best = r.refined_values[refined] >= r.values[best] ? r.refined_grid[refined] : r.grid[best];
  return r;
}

std::vector<double> resolve_parameters(const ExperimentConfig& config, std::size_t workers,
                                       std::vector<std::optional<TuningResult>>* tuning) {
  std::vector<double> params(config.policies.size());
  if (tuning) tuning->assign(config.policies.size(), std::nullopt);
  for (std::size_t k = 0; k < config.policies.size(); ++k) {
    const PolicySpec& p = config.policies[k];
    switch (p.directive.kind) {
      case ParamKind::none: params[k] = default_parameter(p.kind); break;
      case ParamKind::fixed: params[k] = p.directive.value; break;
      case ParamKind::tune: {
        TuningResult r = tune_policy(config, k, workers);
        params[k] = r.best;
        if (tuning) (*tuning)[k] = std::move(r);
        break;
      }
    }
  }
  return params;
}

}  // namespace molte
