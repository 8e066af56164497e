#include "molte/belief.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "molte/error.hpp"
#include "molte/log.hpp"

namespace molte {
namespace {

constexpr double kSymmetryTolerance = 1e-10;
constexpr double kDriftWarning = 1e-8;

double relative_asymmetry(const Eigen::MatrixXd& a) {
  const double scale = a.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  return (a - a.transpose()).cwiseAbs().maxCoeff() / scale;
}

void check_observation(const Observation& obs, std::size_t arms, const Eigen::VectorXd& beta_w) {
  if (obs.arm >= arms) {
    throw InvalidArgument("observation arm " + std::to_string(obs.arm) + " out of range");
  }
  if (!std::isfinite(obs.value)) {
    throw InvalidArgument("observation value is not finite");
  }
  if (static_cast<std::size_t>(beta_w.size()) != arms) {
    throw InvalidArgument("precision vector length does not match the belief");
  }
  const double beta = beta_w(static_cast<Eigen::Index>(obs.arm));
  if (std::isnan(beta) || beta < 0.0) {
    throw InvalidArgument("measurement precision must be non-negative");
  }
}

void update_independent_arm(double& theta, double& var, double beta, double w) {
  if (beta == 0.0 || var == 0.0) return;
  if (var == kUninformedVariance || beta == std::numeric_limits<double>::infinity()) {
    theta = w;
    var = 1.0 / beta;
    return;
  }
  const double precision = 1.0 / var + beta;
  theta = (theta / var + beta * w) / precision;
  var = 1.0 / precision;
}

void update_correlated_in_place(Eigen::VectorXd& theta, Eigen::MatrixXd& cov, std::size_t arm, double beta,
                                double w) {
  if (beta == 0.0) return;
  const auto x = static_cast<Eigen::Index>(arm);
  const double denom = 1.0 / beta + cov(x, x);
  if (!(denom > 0.0)) {
    throw NumericalError("correlated update: predictive variance 1/beta + Sigma_xx is not positive");
  }
  const Eigen::VectorXd column = cov.col(x);
  theta += ((w - theta(x)) / denom) * column;
  cov.noalias() -= (column * column.transpose()) / denom;

  const double drift = relative_asymmetry(cov);
  if (drift > kDriftWarning) {
    log_warning("covariance asymmetry " + std::to_string(drift) + " after update; re-symmetrizing");
  }
  cov = 0.5 * (cov + cov.transpose());
  for (Eigen::Index i = 0; i < cov.rows(); ++i) cov(i, i) = std::max(cov(i, i), 0.0);
}

}  // namespace

GaussianBelief GaussianBelief::independent(Eigen::VectorXd theta, Eigen::VectorXd variance) {
  if (theta.size() < 2) throw InvalidArgument("a belief needs at least two arms");
  if (variance.size() != theta.size()) throw InvalidArgument("variance length does not match mean length");
  if (!theta.allFinite()) throw InvalidArgument("prior mean must be finite");
  for (Eigen::Index i = 0; i < variance.size(); ++i) {
    const double v = variance(i);
    if (std::isnan(v) || v < 0.0) throw InvalidArgument("prior variance must be >= 0 or infinite");
  }
  GaussianBelief b;
  b.mode_ = BeliefMode::independent;
  b.theta_ = std::move(theta);
  b.variance_ = std::move(variance);
  return b;
}

GaussianBelief GaussianBelief::correlated(Eigen::VectorXd theta, Eigen::MatrixXd covariance) {
  if (theta.size() < 2) throw InvalidArgument("a belief needs at least two arms");
  if (covariance.rows() != theta.size() || covariance.cols() != theta.size()) {
    throw InvalidArgument("covariance shape does not match mean length");
  }
  if (!theta.allFinite() || !covariance.allFinite()) {
    throw InvalidArgument("correlated belief requires finite mean and covariance");
  }
  if (relative_asymmetry(covariance) > kSymmetryTolerance) {
    throw InvalidArgument("covariance is not symmetric");
  }
  if ((covariance.diagonal().array() < 0.0).any()) {
    throw InvalidArgument("covariance has a negative diagonal entry");
  }
  GaussianBelief b;
  b.mode_ = BeliefMode::correlated;
  b.theta_ = std::move(theta);
  b.covariance_ = 0.5 * (covariance + covariance.transpose());
  return b;
}

double GaussianBelief::variance(std::size_t x) const {
  const auto i = static_cast<Eigen::Index>(x);
  return mode_ == BeliefMode::independent ? variance_(i) : covariance_(i, i);
}

double GaussianBelief::stddev(std::size_t x) const { return std::sqrt(variance(x)); }

Eigen::VectorXd GaussianBelief::variances() const {
  return mode_ == BeliefMode::independent ? variance_ : Eigen::VectorXd(covariance_.diagonal());
}

Eigen::VectorXd GaussianBelief::stddevs() const { return variances().cwiseSqrt(); }

const Eigen::MatrixXd& GaussianBelief::covariance() const {
  if (mode_ != BeliefMode::correlated) throw InvalidArgument("belief is not in correlated mode");
  return covariance_;
}

std::optional<std::size_t> GaussianBelief::first_uninformed() const {
  if (mode_ == BeliefMode::correlated) return std::nullopt;
  for (Eigen::Index i = 0; i < variance_.size(); ++i) {
    if (variance_(i) == kUninformedVariance) return static_cast<std::size_t>(i);
  }
  return std::nullopt;
}

GaussianBelief GaussianBelief::as_independent() const {
  if (mode_ == BeliefMode::independent) return *this;
  return independent(theta_, covariance_.diagonal());
}

GaussianBelief GaussianBelief::as_correlated() const {
  if (mode_ == BeliefMode::correlated) return *this;
  if (first_uninformed()) {
    throw InvalidArgument("an uninformative prior has no correlated representation");
  }
  return correlated(theta_, variance_.asDiagonal().toDenseMatrix());
}

void update_in_place(GaussianBelief& belief, const Observation& obs, const Eigen::VectorXd& beta_w) {
  check_observation(obs, belief.size(), beta_w);
  const double beta = beta_w(static_cast<Eigen::Index>(obs.arm));
  if (belief.mode_ == BeliefMode::independent) {
    const auto i = static_cast<Eigen::Index>(obs.arm);
    update_independent_arm(belief.theta_(i), belief.variance_(i), beta, obs.value);
  } else {
    update_correlated_in_place(belief.theta_, belief.covariance_, obs.arm, beta, obs.value);
  }
}

GaussianBelief update_independent(const GaussianBelief& belief, const Observation& obs,
                                  const Eigen::VectorXd& beta_w) {
  if (belief.mode() != BeliefMode::independent) {
    throw InvalidArgument("update_independent requires an independent belief");
  }
  GaussianBelief next = belief;
  update_in_place(next, obs, beta_w);
  return next;
}

GaussianBelief update_correlated(const GaussianBelief& belief, const Observation& obs,
                                 const Eigen::VectorXd& beta_w) {
  if (belief.mode() != BeliefMode::correlated) {
    throw InvalidArgument("update_correlated requires a correlated belief");
  }
  GaussianBelief next = belief;
  update_in_place(next, obs, beta_w);
  return next;
}

FrequentistStats::FrequentistStats(std::size_t arms)
    : mean_(arms, 0.0), m2_(arms, 0.0), count_(arms, 0) {}

double FrequentistStats::mean(std::size_t x) const {
  return count_.at(x) == 0 ? std::numeric_limits<double>::quiet_NaN() : mean_[x];
}

double FrequentistStats::variance(std::size_t x) const {
  const std::size_t n = count_.at(x);
  return n < 2 ? std::numeric_limits<double>::quiet_NaN() : m2_[x] / static_cast<double>(n - 1);
}

void FrequentistStats::add(const Observation& obs) {
  if (obs.arm >= count_.size()) throw InvalidArgument("observation arm out of range");
  if (!std::isfinite(obs.value)) throw InvalidArgument("observation value is not finite");
  // Welford recurrence.
  const std::size_t x = obs.arm;
  const double n = static_cast<double>(++count_[x]);
  const double delta = obs.value - mean_[x];
  mean_[x] += delta / n;
  m2_[x] += delta * (obs.value - mean_[x]);
  ++total_;
}

FrequentistStats update_frequentist(FrequentistStats stats, const Observation& obs) {
  stats.add(obs);
  return stats;
}

}  // namespace molte
