#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "molte/belief.hpp"
#include "molte/rng.hpp"

namespace molte {

enum class PolicyKind { kg, kgcb, olkg, ie, kriging, ts, ucb, ucbe, ucbv, klucb, sr, expl, expt };

enum class ParamKind { none, fixed, tune };

/// Parameter suffix of a policy token: bare, `(value)` or `(*)`.
struct PolicyParamDirective {
  ParamKind kind = ParamKind::none;
  double value = 0.0;

  friend bool operator==(const PolicyParamDirective&, const PolicyParamDirective&) = default;
};

struct PolicySpec {
  PolicyKind kind = PolicyKind::kg;
  PolicyParamDirective directive;

  friend bool operator==(const PolicySpec&, const PolicySpec&) = default;
};

std::string_view policy_name(PolicyKind kind);
/// Case-insensitive; also accepts `UCB-E`, `UCB_V` style spellings.
PolicyKind parse_policy_name(std::string_view name);
/// `IE(1.7)`, `UCBE(*)`, `KG`. Throws InvalidArgument on malformed input.
PolicySpec parse_policy_token(std::string_view token);
std::string policy_token(const PolicySpec& spec);

/// IE (z) and UCBE (alpha) carry a parameter; every other policy has none.
bool is_tunable(PolicyKind kind);
double default_parameter(PolicyKind kind);

// Decision rules. Each returns an arm index; ties go to the lowest index.

/// KG values sigma_tilde * f(zeta) of an independent belief. Requires every
/// arm to be informed.
Eigen::VectorXd kg_values_independent(const GaussianBelief& belief, const Eigen::VectorXd& beta_w);
/// Falls back to the argmax of the means when no arm can change the belief.
std::size_t kg_independent(const GaussianBelief& belief, const Eigen::VectorXd& beta_w);

/// E[max_i (a_i + b_i Z)] - max_i a_i for a standard normal Z, computed
/// exactly from the upper envelope of the lines.
double kg_envelope(std::span<const double> a, std::span<const double> b);
Eigen::VectorXd kg_values_correlated(const GaussianBelief& belief, const Eigen::VectorXd& beta_w);
std::size_t kg_correlated(const GaussianBelief& belief, const Eigen::VectorXd& beta_w);

/// KG values for either belief mode.
Eigen::VectorXd kg_values(const GaussianBelief& belief, const Eigen::VectorXd& beta_w);

/// argmax theta + (horizon - n) * nu.
std::size_t olkg(const GaussianBelief& belief, const Eigen::VectorXd& beta_w, std::size_t n, std::size_t horizon);

std::size_t interval_estimation(const GaussianBelief& belief, double z);

Eigen::VectorXd kriging_values(const GaussianBelief& belief);
std::size_t kriging(const GaussianBelief& belief);

/// Correlated beliefs use a Cholesky factor, retried once with jitter
/// 1e-8 * trace / M on failure.
std::size_t thompson(const GaussianBelief& belief, Rng& rng);

std::size_t exploit(const GaussianBelief& belief);
std::size_t explore(std::size_t arms, Rng& rng);

enum class UcbRule { ucb, ucbe, ucbv, klucb };

/// Per-arm inputs of the UCB family. Counts are reals so that the
/// belief-based variant can use pseudo-counts.
struct ArmStatistics {
  Eigen::VectorXd mean;
  Eigen::VectorXd variance;
  Eigen::VectorXd count;
  double n = 0.0;
};

/// Sample statistics with V = 0 where fewer than two observations exist.
/// n is the total observation count.
ArmStatistics frequentist_statistics(const FrequentistStats& stats);
/// Posterior mean and variance with count + 1 pseudo-visits per arm and
/// n = total + M.
ArmStatistics belief_statistics(const GaussianBelief& belief, std::span<const std::size_t> counts);

double ucb_bonus(UcbRule rule, double variance, double count, double n, double alpha = 1.0);
Eigen::VectorXd ucb_indices(UcbRule rule, const ArmStatistics& stats, double alpha = 1.0);
std::size_t ucb_choice(UcbRule rule, const ArmStatistics& stats, double alpha = 1.0);

/// Frequentist entry points: any unvisited arm is chosen first.
std::size_t ucb(const FrequentistStats& stats, double n);
std::size_t ucb_e(const FrequentistStats& stats, double alpha);
std::size_t ucb_v(const FrequentistStats& stats, double n);
std::size_t klucb_gauss(const FrequentistStats& stats, double n);

// Successive rejects.

double sr_log_bar(std::size_t arms);
/// Cumulative per-arm pull targets n_1..n_{M-1}.
std::vector<std::size_t> sr_schedule(std::size_t arms, std::size_t budget);
/// Pulls the schedule spends before any residual budget.
std::size_t sr_total_pulls(std::size_t arms, std::span<const std::size_t> schedule);

// Stateful policies.

struct PolicyContext {
  GaussianBelief prior;
  Eigen::VectorXd beta_w;
  std::size_t horizon = 0;
};

/// Sequential decision maker: choose() then observe(), at most `horizon`
/// times. The round counter equals the number of observe() calls.
class Policy {
 public:
  virtual ~Policy() = default;

  /// Both throw BudgetError once `horizon` observations have been made.
  std::size_t choose(Rng& rng);
  void observe(const Observation& obs);

  /// Arm the policy would pick if measuring stopped now.
  virtual std::size_t recommend() const;
  /// Mean estimates behind recommend(): posterior means or sample means.
  virtual Eigen::VectorXd estimates() const = 0;
  virtual PolicyKind kind() const = 0;

  std::size_t round() const noexcept { return round_; }
  std::size_t horizon() const noexcept { return horizon_; }
  std::size_t arms() const noexcept { return arms_; }

 protected:
  Policy(std::size_t arms, std::size_t horizon) : arms_(arms), horizon_(horizon) {}

  virtual std::size_t do_choose(Rng& rng) = 0;
  virtual void do_observe(const Observation& obs) = 0;

 private:
  std::size_t arms_;
  std::size_t horizon_;
  std::size_t round_ = 0;
};

/// `parameter` is ignored by policies without one.
std::unique_ptr<Policy> make_policy(PolicyKind kind, double parameter, const PolicyContext& context);

}  // namespace molte
