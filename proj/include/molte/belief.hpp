#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace molte {

enum class BeliefMode { independent, correlated };

/// Variance sentinel for an arm carrying no prior information (precision 0).
inline constexpr double kUninformedVariance = std::numeric_limits<double>::infinity();

struct Observation {
  std::size_t arm = 0;
  double value = 0.0;
};

/// Gaussian belief N(theta, Sigma) over the unknown arm means.
///
/// Independent mode stores one variance per arm (possibly the infinite
/// sentinel). Correlated mode stores the full covariance, which must be
/// finite and symmetric.
class GaussianBelief {
 public:
  static GaussianBelief independent(Eigen::VectorXd theta, Eigen::VectorXd variance);
  static GaussianBelief correlated(Eigen::VectorXd theta, Eigen::MatrixXd covariance);

  BeliefMode mode() const noexcept { return mode_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(theta_.size()); }

  const Eigen::VectorXd& mean() const noexcept { return theta_; }
  double mean(std::size_t x) const { return theta_(static_cast<Eigen::Index>(x)); }
  double variance(std::size_t x) const;
  double stddev(std::size_t x) const;
  Eigen::VectorXd variances() const;
  Eigen::VectorXd stddevs() const;

  /// Full covariance; only valid in correlated mode.
  const Eigen::MatrixXd& covariance() const;

  bool informed(std::size_t x) const { return variance(x) != kUninformedVariance; }
  /// Lowest-index arm still carrying the uninformed sentinel.
  std::optional<std::size_t> first_uninformed() const;

  /// Same distribution with off-diagonal covariance dropped.
  GaussianBelief as_independent() const;
  /// Same distribution with an explicit diagonal covariance. Rejects
  /// uninformed arms.
  GaussianBelief as_correlated() const;

 private:
  friend void update_in_place(GaussianBelief&, const Observation&, const Eigen::VectorXd&);

  GaussianBelief() = default;

  BeliefMode mode_ = BeliefMode::independent;
  Eigen::VectorXd theta_;
  Eigen::VectorXd variance_;     // independent mode
  Eigen::MatrixXd covariance_;   // correlated mode
};

/// Conjugate normal update of one arm under an independent belief.
GaussianBelief update_independent(const GaussianBelief& belief, const Observation& obs,
                                  const Eigen::VectorXd& beta_w);

/// Rank-one (Sherman-Morrison) update of a correlated belief.
GaussianBelief update_correlated(const GaussianBelief& belief, const Observation& obs,
                                 const Eigen::VectorXd& beta_w);

/// Dispatches on the belief mode and updates without copying.
void update_in_place(GaussianBelief& belief, const Observation& obs, const Eigen::VectorXd& beta_w);

/// Running per-arm sample statistics for frequentist policies.
class FrequentistStats {
 public:
  explicit FrequentistStats(std::size_t arms);

  std::size_t size() const noexcept { return count_.size(); }
  std::size_t count(std::size_t x) const { return count_.at(x); }
  std::size_t total() const noexcept { return total_; }
  /// Sample mean; NaN for an unvisited arm.
  double mean(std::size_t x) const;
  /// Unbiased sample variance; NaN until the arm has two observations.
  double variance(std::size_t x) const;
  bool has_variance(std::size_t x) const { return count_.at(x) >= 2; }

  void add(const Observation& obs);

 private:
  std::vector<double> mean_;
  std::vector<double> m2_;
  std::vector<std::size_t> count_;
  std::size_t total_ = 0;
};

FrequentistStats update_frequentist(FrequentistStats stats, const Observation& obs);

}  // namespace molte
