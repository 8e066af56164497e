#include <algorithm>
#include <cmath>
#include <limits>

#include "molte/error.hpp"
#include "molte/numeric.hpp"
#include "molte/policies.hpp"

namespace molte {
namespace {

std::size_t argmax_of(const Eigen::VectorXd& v) { return argmax({v.data(), static_cast<std::size_t>(v.size())}); }

}  // namespace

std::size_t exploit(const GaussianBelief& belief) { return argmax_of(belief.mean()); }

std::size_t explore(std::size_t arms, Rng& rng) {
  if (arms == 0) throw InvalidArgument("explore needs at least one arm");
  return std::uniform_int_distribution<std::size_t>(0, arms - 1)(rng);
}

std::size_t interval_estimation(const GaussianBelief& belief, double z) {
  if (!std::isfinite(z)) throw InvalidArgument("IE parameter must be finite");
  Eigen::VectorXd score = belief.mean();
  // Skip the product when z == 0 so an infinite variance cannot turn into NaN.
  if (z != 0.0) score += z * belief.stddevs();
  return argmax_of(score);
}

Eigen::VectorXd kriging_values(const GaussianBelief& belief) {
  const Eigen::VectorXd& theta = belief.mean();
  const Eigen::VectorXd sigma = belief.stddevs();
  const std::size_t best = argmax_of((theta + sigma).eval());
  const double anchor = theta(static_cast<Eigen::Index>(best));
  Eigen::VectorXd value(theta.size());
  for (Eigen::Index x = 0; x < theta.size(); ++x) {
    const double delta = theta(x) - anchor;
    const double s = sigma(x);
    if (s == 0.0) {
      value(x) = std::max(delta, 0.0);
    } else {
      const double u = delta / s;
      value(x) = delta * normal_cdf(u) + s * normal_pdf(u);
    }
  }
  return value;
}

std::size_t kriging(const GaussianBelief& belief) { return argmax_of(kriging_values(belief)); }

std::size_t thompson(const GaussianBelief& belief, Rng& rng) {
  const auto m = static_cast<Eigen::Index>(belief.size());
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd z(m);
  for (Eigen::Index i = 0; i < m; ++i) z(i) = normal(rng);
  if (belief.mode() == BeliefMode::independent) {
    Eigen::VectorXd sample = belief.mean();
    const Eigen::VectorXd sd = belief.stddevs();
    for (Eigen::Index i = 0; i < m; ++i) {
      if (sd(i) > 0.0) sample(i) += sd(i) * z(i);
    }
    return argmax_of(sample);
  }
  const Eigen::MatrixXd& cov = belief.covariance();
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) {
    Eigen::MatrixXd jittered = cov;
    jittered.diagonal().array() += 1e-8 * cov.trace() / static_cast<double>(m);
    llt.compute(jittered);
    if (llt.info() != Eigen::Success) throw NumericalError("covariance factorization failed after jitter");
  }
  const Eigen::VectorXd sample = belief.mean() + llt.matrixL() * z;
  return argmax_of(sample);
}

ArmStatistics frequentist_statistics(const FrequentistStats& stats) {
  const auto m = static_cast<Eigen::Index>(stats.size());
  ArmStatistics s{Eigen::VectorXd(m), Eigen::VectorXd(m), Eigen::VectorXd(m), static_cast<double>(stats.total())};
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto x = static_cast<std::size_t>(i);
    s.mean(i) = stats.mean(x);
    s.variance(i) = stats.has_variance(x) ? stats.variance(x) : 0.0;
    s.count(i) = static_cast<double>(stats.count(x));
  }
  return s;
}

ArmStatistics belief_statistics(const GaussianBelief& belief, std::span<const std::size_t> counts) {
  if (counts.size() != belief.size()) throw InvalidArgument("count vector length mismatch");
  const auto m = static_cast<Eigen::Index>(belief.size());
  ArmStatistics s{belief.mean(), belief.variances(), Eigen::VectorXd(m), 0.0};
  std::size_t total = 0;
  for (Eigen::Index i = 0; i < m; ++i) {
    s.count(i) = static_cast<double>(counts[static_cast<std::size_t>(i)]) + 1.0;
    total += counts[static_cast<std::size_t>(i)];
  }
  s.n = static_cast<double>(total + belief.size());
  return s;
}

double ucb_bonus(UcbRule rule, double variance, double count, double n, double alpha) {
  if (!(count > 0.0)) return std::numeric_limits<double>::infinity();
  const double log_n = n > 1.0 ? std::log(n) : 0.0;
  switch (rule) {
    case UcbRule::ucb:
      return std::sqrt(2.0 * variance * log_n / count);
    case UcbRule::ucbe:
      return std::sqrt(alpha / count);
    case UcbRule::ucbv:
      return std::sqrt(variance * log_n / count) + 1.5 * log_n / count;
    case UcbRule::klucb: {
      // ln ln n is undefined at n = 1 and the sum is negative for small n.
      const double inner = n > 1.0 ? std::max(0.0, log_n + 3.0 * std::log(log_n)) : 0.0;
      return std::sqrt(2.0 * variance * inner / count);
    }
  }
  throw InvalidArgument("unknown UCB rule");
}

Eigen::VectorXd ucb_indices(UcbRule rule, const ArmStatistics& stats, double alpha) {
  Eigen::VectorXd idx(stats.mean.size());
  for (Eigen::Index i = 0; i < idx.size(); ++i) {
    idx(i) = stats.mean(i) + ucb_bonus(rule, stats.variance(i), stats.count(i), stats.n, alpha);
  }
  return idx;
}

std::size_t ucb_choice(UcbRule rule, const ArmStatistics& stats, double alpha) {
  return argmax_of(ucb_indices(rule, stats, alpha));
}

namespace {

std::size_t frequentist_choice(UcbRule rule, const FrequentistStats& stats, double n, double alpha) {
  for (std::size_t x = 0; x < stats.size(); ++x) {
    if (stats.count(x) == 0) return x;
  }
  ArmStatistics s = frequentist_statistics(stats);
  s.n = n;
  return ucb_choice(rule, s, alpha);
}

}  // namespace

std::size_t ucb(const FrequentistStats& stats, double n) { return frequentist_choice(UcbRule::ucb, stats, n, 1.0); }

std::size_t ucb_e(const FrequentistStats& stats, double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw InvalidArgument("UCBE parameter must be positive and finite");
  return frequentist_choice(UcbRule::ucbe, stats, static_cast<double>(stats.total()), alpha);
}

std::size_t ucb_v(const FrequentistStats& stats, double n) { return frequentist_choice(UcbRule::ucbv, stats, n, 1.0); }

std::size_t klucb_gauss(const FrequentistStats& stats, double n) {
  return frequentist_choice(UcbRule::klucb, stats, n, 1.0);
}

}  // namespace molte
