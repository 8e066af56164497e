#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include "molte/error.hpp"
#include "molte/log.hpp"
#include "molte/prior.hpp"

namespace molte {

std::size_t mle_parameter_count(BeliefMode mode, std::size_t dims) {
  return mode == BeliefMode::independent ? 2 : 2 + dims + 1;
}

Eigen::MatrixXd latin_hypercube(std::size_t n, std::size_t dims, Rng& rng) {
  if (n == 0 || dims == 0) throw InvalidArgument("latin hypercube needs n >= 1 and d >= 1");
  Eigen::MatrixXd u(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dims));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::size_t> perm(n);
  for (std::size_t j = 0; j < dims; ++j) {
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    for (std::size_t i = 0; i < n; ++i) {
      const double v = (static_cast<double>(perm[i]) + unit(rng)) / static_cast<double>(n);
      u(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = std::min(v, std::nextafter(1.0, 0.0));
    }
  }
  return u;
}

namespace {

struct Box {
  Eigen::RowVectorXd lo, span;
};

Box coordinate_box(const Eigen::MatrixXd& coords) {
  Box b{coords.colwise().minCoeff(), coords.colwise().maxCoeff() - coords.colwise().minCoeff()};
  for (Eigen::Index j = 0; j < b.span.size(); ++j) {
    if (b.span(j) <= 0.0) b.span(j) = 1.0;
  }
  return b;
}

std::size_t nearest_arm(const Eigen::RowVectorXd& unit_point, const Eigen::MatrixXd& coords, const Box& box,
                        const std::vector<bool>* skip) {
  double best = std::numeric_limits<double>::infinity();
  std::size_t arm = 0;
  for (Eigen::Index a = 0; a < coords.rows(); ++a) {
    if (skip && (*skip)[static_cast<std::size_t>(a)]) continue;
    const double d = ((coords.row(a) - box.lo).cwiseQuotient(box.span) - unit_point).squaredNorm();
    if (d < best) {
      best = d;
      arm = static_cast<std::size_t>(a);
    }
  }
  return arm;
}

}  // namespace

std::vector<std::size_t> snap_to_arms(const Eigen::MatrixXd& unit_points, const Eigen::MatrixXd& coords, Rng& rng) {
  if (unit_points.cols() != coords.cols()) throw InvalidArgument("design dimension does not match coordinates");
  const Box box = coordinate_box(coords);
  const auto m = static_cast<std::size_t>(coords.rows());
  std::vector<bool> used(m, false);
  std::size_t used_count = 0;
  std::vector<std::size_t> arms;
  arms.reserve(static_cast<std::size_t>(unit_points.rows()));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  constexpr int kRedraws = 50;
  for (Eigen::Index i = 0; i < unit_points.rows(); ++i) {
    std::size_t arm = nearest_arm(unit_points.row(i), coords, box, nullptr);
    if (used[arm] && used_count < m) {
      for (int t = 0; t < kRedraws && used[arm]; ++t) {
        Eigen::RowVectorXd p(coords.cols());
        for (Eigen::Index j = 0; j < p.size(); ++j) p(j) = unit(rng);
        arm = nearest_arm(p, coords, box, nullptr);
      }
      if (used[arm]) arm = nearest_arm(unit_points.row(i), coords, box, &used);
    }
    if (!used[arm]) {
      used[arm] = true;
      ++used_count;
    }
    arms.push_back(arm);
  }
  return arms;
}

Eigen::MatrixXd squared_exponential(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double sigma,
                                    std::span<const double> lambdas) {
  if (a.cols() != b.cols() || static_cast<std::size_t>(a.cols()) != lambdas.size()) {
    throw InvalidArgument("kernel dimension mismatch");
  }
  Eigen::MatrixXd k(a.rows(), b.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < b.rows(); ++j) {
      double s = 0.0;
      for (Eigen::Index d = 0; d < a.cols(); ++d) {
        const double diff = a(i, d) - b(j, d);
        s += lambdas[static_cast<std::size_t>(d)] * diff * diff;
      }
      k(i, j) = sigma * std::exp(-s);
    }
  }
  return k;
}

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

struct Profiled {
  double log_lik = -std::numeric_limits<double>::infinity();
  double theta0 = 0.0;
};

// Log-likelihood with theta0 either fixed or profiled by GLS.
Profiled evaluate(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double sigma, std::span<const double> lambdas,
                  double noise_var, const double* fixed_theta0) {
  const Eigen::Index n = y.size();
  Eigen::MatrixXd k = squared_exponential(x, x, sigma, lambdas);
  k.diagonal().array() += noise_var;
  Eigen::LLT<Eigen::MatrixXd> llt(k);
  if (llt.info() != Eigen::Success) return {};
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
  double theta0 = 0.0;
  if (fixed_theta0) {
    theta0 = *fixed_theta0;
  } else {
    const Eigen::VectorXd kinv_one = llt.solve(ones);
    const double denom = ones.dot(kinv_one);
    if (!(denom > 0.0)) return {};
    theta0 = kinv_one.dot(y) / denom;
  }
  const Eigen::VectorXd r = y - theta0 * ones;
  const double quad = r.dot(llt.solve(r));
  const Eigen::MatrixXd l = llt.matrixL();
  double logdet = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) logdet += 2.0 * std::log(l(i, i));
  const double ll = -0.5 * quad - 0.5 * logdet - 0.5 * static_cast<double>(n) * kLog2Pi;
  if (!std::isfinite(ll)) return {};
  return {ll, theta0};
}

struct Objective {
  const Eigen::MatrixXd* x;
  const Eigen::VectorXd* y;
  std::vector<double> lo, hi;  // bounds in log space
  std::size_t evaluations = 0;
  std::size_t max_evaluations = 0;

  // phi = (log sigma, log lambda_1..d, log noise)
  double operator()(const gsl_vector* phi) {
    ++evaluations;
    const std::size_t d = static_cast<std::size_t>(x->cols());
    std::vector<double> v(d + 2);
    double penalty = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double raw = gsl_vector_get(phi, i);
      v[i] = std::clamp(raw, lo[i], hi[i]);
      penalty += std::abs(raw - v[i]);
    }
    std::vector<double> lambdas(d);
    for (std::size_t i = 0; i < d; ++i) lambdas[i] = std::exp(v[1 + i]);
    const Profiled p = evaluate(*x, *y, std::exp(v[0]), lambdas, std::exp(v[d + 1]), nullptr);
    if (!std::isfinite(p.log_lik)) return 1e300;
    return -p.log_lik + penalty;
  }
};

double gsl_objective(const gsl_vector* phi, void* params) { return (*static_cast<Objective*>(params))(phi); }

KernelHyperparams unpack(const std::vector<double>& v, std::size_t d) {
  KernelHyperparams h;
  h.sigma = std::exp(v[0]);
  h.lambdas.resize(d);
  for (std::size_t i = 0; i < d; ++i) h.lambdas[i] = std::exp(v[1 + i]);
  h.noise_var = std::exp(v[d + 1]);
  return h;
}

double sample_variance(const Eigen::VectorXd& y) {
  if (y.size() < 2) return 0.0;
  const double m = y.mean();
  return (y.array() - m).square().sum() / static_cast<double>(y.size() - 1);
}

}  // namespace

double gp_log_likelihood(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const KernelHyperparams& h) {
  if (x.rows() != y.size()) throw InvalidArgument("design size does not match observations");
  return evaluate(x, y, h.sigma, h.lambdas, h.noise_var, &h.theta0).log_lik;
}

KernelHyperparams fit_kernel(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, Rng& rng,
                             const MleOptions& options, bool* fell_back) {
  if (x.rows() != y.size() || y.size() < 2) throw InvalidArgument("kernel fit needs at least two observations");
  const auto d = static_cast<std::size_t>(x.cols());
  const std::size_t k = d + 2;

  const double var_y = sample_variance(y);
  const double scale = std::max({var_y, 1e-12 * y.squaredNorm() / static_cast<double>(y.size()), 1e-12});
  const Eigen::RowVectorXd range = x.colwise().maxCoeff() - x.colwise().minCoeff();

  Objective obj{&x, &y, std::vector<double>(k), std::vector<double>(k), 0, 0};
  obj.lo[0] = std::log(scale * 1e-10);
  obj.hi[0] = std::log(scale * 1e6);
  std::vector<double> widest(k);
  widest[0] = std::log(scale);
  for (std::size_t i = 0; i < d; ++i) {
    const double r = range(static_cast<Eigen::Index>(i)) > 0 ? range(static_cast<Eigen::Index>(i)) : 1.0;
    const double base = std::log(1.0 / (r * r));
    obj.lo[1 + i] = base - std::log(1e4);
    obj.hi[1 + i] = base + std::log(1e6);
    widest[1 + i] = base;
  }
  obj.lo[d + 1] = std::log(scale * 1e-12);
  obj.hi[d + 1] = std::log(scale * 1e2);
  widest[d + 1] = std::log(0.1 * scale);

  gsl_set_error_handler_off();
  const gsl_multimin_fminimizer_type* type = gsl_multimin_fminimizer_nmsimplex2;
  gsl_multimin_fminimizer* solver = gsl_multimin_fminimizer_alloc(type, k);
  gsl_vector* start = gsl_vector_alloc(k);
  gsl_vector* step = gsl_vector_alloc(k);
  gsl_vector_set_all(step, 1.0);
  gsl_multimin_function fn{&gsl_objective, k, &obj};

  std::normal_distribution<double> jitter(0.0, 1.0);
  // Start offsets in log space: the widest point first, then shorter
  // length-scales and smaller noise, each jittered.
  const double offsets[][3] = {{0, 0, 0}, {0, 2.3, -2.3}, {0, 4.6, -4.6}, {-1, 1.2, 0.5}, {1, 3.5, -6.9}};
  double best_value = std::numeric_limits<double>::infinity();
  std::vector<double> best(k);
  for (std::size_t s = 0; s < options.starts; ++s) {
    const double* o = offsets[s % std::size(offsets)];
    const double noise = s == 0 ? 0.0 : 0.3;
    gsl_vector_set(start, 0, widest[0] + o[0] + noise * jitter(rng));
    for (std::size_t i = 0; i < d; ++i) gsl_vector_set(start, 1 + i, widest[1 + i] + o[1] + noise * jitter(rng));
    gsl_vector_set(start, d + 1, widest[d + 1] + o[2] + noise * jitter(rng));
    obj.evaluations = 0;
    if (gsl_multimin_fminimizer_set(solver, &fn, start, step) != GSL_SUCCESS) continue;
    while (obj.evaluations < options.max_evaluations) {
      if (gsl_multimin_fminimizer_iterate(solver) != GSL_SUCCESS) break;
      if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(solver), 1e-6) == GSL_SUCCESS) break;
    }
    const double value = gsl_multimin_fminimizer_minimum(solver);
    if (std::isfinite(value) && value < 1e299 && value < best_value) {
      best_value = value;
      const gsl_vector* xs = gsl_multimin_fminimizer_x(solver);
      for (std::size_t i = 0; i < k; ++i) best[i] = std::clamp(gsl_vector_get(xs, i), obj.lo[i], obj.hi[i]);
    }
  }
  gsl_vector_free(step);
  gsl_vector_free(start);
  gsl_multimin_fminimizer_free(solver);

  bool fallback = !std::isfinite(best_value);
  if (fallback) {
    log_warning("kernel likelihood search failed at every start; using the widest-grid hyperparameters");
    best = widest;
  }
  if (fell_back) *fell_back = fallback;
  KernelHyperparams h = unpack(best, d);
  const Profiled p = evaluate(x, y, h.sigma, h.lambdas, h.noise_var, nullptr);
  h.theta0 = std::isfinite(p.log_lik) ? p.theta0 : y.mean();
  return h;
}

MleFit fit_mle(const ProblemInstance& problem, BeliefMode mode, Rng& rng, const MleOptions& options) {
  const std::size_t d = problem.dims();
  if (d == 0) throw InvalidArgument("maximum-likelihood prior needs arm coordinates");
  const std::size_t p = mle_parameter_count(mode, d);
  const std::size_t design_size = options.points_per_parameter * p;

  MleFit fit{GaussianBelief::independent(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(problem.size())),
                                         Eigen::VectorXd::Zero(static_cast<Eigen::Index>(problem.size()))),
             0, p, std::nullopt, {}, {}, false};
  fit.design_arms = snap_to_arms(latin_hypercube(design_size, d, rng), problem.coords, rng);

  std::vector<double> values;
  values.reserve(design_size + p);
  for (std::size_t arm : fit.design_arms) values.push_back(sample_observation(problem, arm, rng));

  // One replicate at each of the p distinct arms with the best responses.
  std::vector<std::size_t> order(design_size);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
  std::vector<std::size_t> replicate_arms;
  for (std::size_t i : order) {
    if (replicate_arms.size() == p) break;
    const std::size_t arm = fit.design_arms[i];
    if (std::find(replicate_arms.begin(), replicate_arms.end(), arm) == replicate_arms.end()) {
      replicate_arms.push_back(arm);
    }
  }
  // Fewer distinct arms than p: repeat the best ones.
  for (std::size_t i = 0; replicate_arms.size() < p; ++i) replicate_arms.push_back(replicate_arms[i]);
  for (std::size_t arm : replicate_arms) {
    fit.design_arms.push_back(arm);
    values.push_back(sample_observation(problem, arm, rng));
  }

  const auto n = static_cast<Eigen::Index>(values.size());
  fit.design_values = Eigen::Map<const Eigen::VectorXd>(values.data(), n);
  fit.observations_consumed = values.size();
  const auto m = static_cast<Eigen::Index>(problem.size());

  if (mode == BeliefMode::independent) {
    const double theta0 = fit.design_values.mean();
    const double var0 = sample_variance(fit.design_values);
    fit.belief = GaussianBelief::independent(Eigen::VectorXd::Constant(m, theta0), Eigen::VectorXd::Constant(m, var0));
    return fit;
  }

  Eigen::MatrixXd x(n, static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < n; ++i) x.row(i) = problem.coords.row(static_cast<Eigen::Index>(fit.design_arms[static_cast<std::size_t>(i)]));
  bool fell_back = false;
  KernelHyperparams h = fit_kernel(x, fit.design_values, rng, options, &fell_back);
  fit.fell_back = fell_back;
  Eigen::MatrixXd cov = squared_exponential(problem.coords, problem.coords, h.sigma, h.lambdas);
  cov = 0.5 * (cov + cov.transpose());
  fit.belief = GaussianBelief::correlated(Eigen::VectorXd::Constant(m, h.theta0), std::move(cov));
  fit.kernel = std::move(h);
  return fit;
}

}  // namespace molte
