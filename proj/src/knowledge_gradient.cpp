#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "molte/error.hpp"
#include "molte/numeric.hpp"
#include "molte/policies.hpp"

namespace molte {
namespace {

// Standard deviation of the change in the posterior mean of arm x when it
// is measured once: sqrt(sigma^2 - sigma'^2) = sigma^2 / sqrt(sigma^2 + 1/beta).
double sigma_tilde(double var, double beta) {
  if (!(var > 0.0) || !(beta > 0.0)) return 0.0;
  return var / std::sqrt(var + 1.0 / beta);
}

void check_beta(const GaussianBelief& belief, const Eigen::VectorXd& beta_w) {
  if (static_cast<std::size_t>(beta_w.size()) != belief.size()) throw InvalidArgument("beta_w length mismatch");
}

}  // namespace

Eigen::VectorXd kg_values_independent(const GaussianBelief& belief, const Eigen::VectorXd& beta_w) {
  check_beta(belief, beta_w);
  const std::size_t m = belief.size();
  if (belief.first_uninformed()) throw InvalidArgument("knowledge gradient needs every arm informed");
  const Eigen::VectorXd& theta = belief.mean();

  // Best and second-best means give max over x' != x in O(M).
  std::size_t top = 0;
  for (std::size_t i = 1; i < m; ++i) {
    if (theta(static_cast<Eigen::Index>(i)) > theta(static_cast<Eigen::Index>(top))) top = i;
  }
  double second = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < m; ++i) {
    if (i != top) second = std::max(second, theta(static_cast<Eigen::Index>(i)));
  }

  Eigen::VectorXd nu(static_cast<Eigen::Index>(m));
  for (std::size_t x = 0; x < m; ++x) {
    const auto i = static_cast<Eigen::Index>(x);
    const double st = sigma_tilde(belief.variance(x), beta_w(i));
    if (st == 0.0) {
      nu(i) = 0.0;
      continue;
    }
    const double other = x == top ? second : theta(static_cast<Eigen::Index>(top));
    const double zeta = -std::abs(theta(i) - other) / st;
    nu(i) = st * kg_f(zeta);
  }
  return nu;
}

std::size_t kg_independent(const GaussianBelief& belief, const Eigen::VectorXd& beta_w) {
  const Eigen::VectorXd nu = kg_values_independent(belief, beta_w);
  // No arm can move the belief: nothing to learn.
  if (nu.maxCoeff() <= 0.0) return exploit(belief);
  return argmax({nu.data(), static_cast<std::size_t>(nu.size())});
}

double kg_envelope(std::span<const double> a, std::span<const double> b) {
  const std::size_t m = a.size();
  if (b.size() != m || m == 0) throw InvalidArgument("kg_envelope needs matching non-empty a and b");
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return b[i] != b[j] ? b[i] < b[j] : a[i] < a[j];
  });
  // Equal slopes: only the line with the largest intercept can be on top.
  std::vector<std::size_t> lines;
  for (std::size_t k = 0; k < m; ++k) {
    if (k + 1 < m && b[order[k]] == b[order[k + 1]]) continue;
    lines.push_back(order[k]);
  }
  if (lines.size() == 1) return 0.0;

  // Upper envelope; cut[k] is where envelope line k takes over from k-1.
  std::vector<std::size_t> env{lines[0]};
  std::vector<double> cut{-std::numeric_limits<double>::infinity()};
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const std::size_t i = lines[k];
    double c = 0.0;
    while (true) {
      const std::size_t j = env.back();
      c = (a[j] - a[i]) / (b[i] - b[j]);
      if (env.size() > 1 && c <= cut.back()) {
        env.pop_back();
        cut.pop_back();
        continue;
      }
      break;
    }
    env.push_back(i);
    cut.push_back(c);
  }
  double nu = 0.0;
  for (std::size_t k = 1; k < env.size(); ++k) nu += (b[env[k]] - b[env[k - 1]]) * kg_f(-std::abs(cut[k]));
  return std::max(nu, 0.0);
}

Eigen::VectorXd kg_values_correlated(const GaussianBelief& belief, const Eigen::VectorXd& beta_w) {
  check_beta(belief, beta_w);
  const Eigen::MatrixXd& cov = belief.covariance();
  const auto m = static_cast<Eigen::Index>(belief.size());
  const Eigen::VectorXd& a = belief.mean();
  Eigen::VectorXd nu(m);
  Eigen::VectorXd b(m);
  for (Eigen::Index x = 0; x < m; ++x) {
    const double beta = beta_w(x);
    const double noise = beta > 0.0 ? 1.0 / beta : std::numeric_limits<double>::infinity();
    const double denom = noise + cov(x, x);
    if (!(denom > 0.0) || std::isinf(denom)) {
      nu(x) = 0.0;
      continue;
    }
    b = cov.col(x) / std::sqrt(denom);
    nu(x) = kg_envelope({a.data(), static_cast<std::size_t>(m)}, {b.data(), static_cast<std::size_t>(m)});
  }
  return nu;
}

std::size_t kg_correlated(const GaussianBelief& belief, const Eigen::VectorXd& beta_w) {
  const Eigen::VectorXd nu = kg_values_correlated(belief, beta_w);
  if (nu.maxCoeff() <= 0.0) return exploit(belief);
  return argmax({nu.data(), static_cast<std::size_t>(nu.size())});
}

Eigen::VectorXd kg_values(const GaussianBelief& belief, const Eigen::VectorXd& beta_w) {
  return belief.mode() == BeliefMode::correlated ? kg_values_correlated(belief, beta_w)
                                                 : kg_values_independent(belief, beta_w);
}

std::size_t olkg(const GaussianBelief& belief, const Eigen::VectorXd& beta_w, std::size_t n, std::size_t horizon) {
  const double remaining = n < horizon ? static_cast<double>(horizon - n) : 0.0;
  Eigen::VectorXd score = belief.mean();
  if (remaining > 0.0) score += remaining * kg_values(belief, beta_w);
  return argmax({score.data(), static_cast<std::size_t>(score.size())});
}

}  // namespace molte
