#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "molte/belief.hpp"
#include "molte/problems.hpp"
#include "molte/rng.hpp"

namespace molte {

enum class PriorMode { uninformative, given, default_prior, mle };

/// User-supplied prior: mean plus either a full covariance or per-arm
/// variances, and optionally the measurement precision.
struct PriorPayload {
  Eigen::VectorXd mean;
  std::optional<Eigen::MatrixXd> covariance;
  std::optional<Eigen::VectorXd> variance;
  std::optional<Eigen::VectorXd> beta_w;
};

struct PriorSpec {
  PriorMode mode = PriorMode::uninformative;
  std::optional<PriorPayload> given;
  BeliefMode belief_mode = BeliefMode::independent;
};

/// Squared-exponential kernel sigma * exp(-sum_i lambda_i (x_i - x'_i)^2)
/// with a constant mean and white observation noise.
struct KernelHyperparams {
  double theta0 = 0.0;
  double sigma = 1.0;
  std::vector<double> lambdas;
  double noise_var = 0.0;
};

struct MleOptions {
  std::size_t starts = 5;
  std::size_t max_evaluations = 500;
  std::size_t points_per_parameter = 10;
};

struct MleFit {
  GaussianBelief belief;
  std::size_t observations_consumed = 0;
  std::size_t parameter_count = 0;
  std::optional<KernelHyperparams> kernel;  ///< correlated mode only
  std::vector<std::size_t> design_arms;     ///< every measured arm, replicates last
  Eigen::VectorXd design_values;
  bool fell_back = false;
};

/// Prior ready for the harness: belief, the precision policies should use,
/// and how many extra measurements building it consumed.
struct BuiltPrior {
  GaussianBelief belief;
  Eigen::VectorXd beta_w;
  std::size_t extra_observations = 0;
  std::optional<MleFit> mle;
};

GaussianBelief build_uninformative(std::size_t arms, BeliefMode mode = BeliefMode::independent);
GaussianBelief build_given(const PriorPayload& payload, BeliefMode mode);

/// Prior CSV: header `kind,1,2,...,M`; one `mean` row, then either M `cov`
/// rows or one `var` row, then an optional `beta_w` row.
PriorPayload read_prior_csv(const std::filesystem::path& path);
void write_prior_csv(const std::filesystem::path& path, const PriorPayload& payload);

BuiltPrior build_prior(const PriorSpec& spec, const ProblemDraw& draw, Rng& rng,
                       const MleOptions& options = {});

// Maximum-likelihood prior fitting.

/// Number of hyperparameters the fit estimates: 2 for independent beliefs,
/// 2 + d + 1 (mean, scale, d length weights, noise) for correlated ones.
std::size_t mle_parameter_count(BeliefMode mode, std::size_t dims);

/// n points in [0,1)^d, one per stratum in every dimension.
Eigen::MatrixXd latin_hypercube(std::size_t n, std::size_t dims, Rng& rng);

/// Maps unit-cube design points onto distinct grid arms (nearest arm,
/// re-drawing on collisions while unused arms remain).
std::vector<std::size_t> snap_to_arms(const Eigen::MatrixXd& unit_points, const Eigen::MatrixXd& coords, Rng& rng);

Eigen::MatrixXd squared_exponential(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double sigma,
                                    std::span<const double> lambdas);

/// Gaussian marginal log-likelihood of y at hyperparameters `h` (theta0 is
/// used as given).
double gp_log_likelihood(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const KernelHyperparams& h);

/// Multi-start simplex maximization of the marginal likelihood; theta0 is
/// profiled out by generalized least squares.
KernelHyperparams fit_kernel(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, Rng& rng,
                             const MleOptions& options = {}, bool* fell_back = nullptr);

MleFit fit_mle(const ProblemInstance& problem, BeliefMode mode, Rng& rng, const MleOptions& options = {});

}  // namespace molte
