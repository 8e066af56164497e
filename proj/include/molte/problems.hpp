#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "molte/belief.hpp"
#include "molte/rng.hpp"

namespace molte {

enum class RewardKind {
  gaussian,   ///< Normal(mu_x, 1/beta_x) draws.
  bernoulli,  ///< Bernoulli(mu_x) draws; beta_w is the worst-case 1/0.25.
  auf,        ///< theta1 * min(x, xi) - theta2 * x with a fresh xi per draw.
};

/// Parameters of the asymmetric unimodular function F(x, xi).
struct AufModel {
  double theta1 = 1.0;
  double theta2 = 0.2;
  double xi_mean = 60.0;
  double xi_std = 18.0;
};

/// One sampled truth.
struct ProblemInstance {
  std::string name;
  Eigen::VectorXd mu;       ///< true arm means
  Eigen::VectorXd beta_w;   ///< per-arm observation precision
  Eigen::MatrixXd coords;   ///< M x d arm coordinates
  RewardKind reward_kind = RewardKind::gaussian;
  std::optional<AufModel> auf;

  std::size_t size() const noexcept { return static_cast<std::size_t>(mu.size()); }
  std::size_t dims() const noexcept { return static_cast<std::size_t>(coords.cols()); }
};

/// A problem instance together with the prior it was built from, when the
/// problem class defines one (GPR, Equal-prior).
struct ProblemDraw {
  ProblemInstance instance;
  std::optional<GaussianBelief> default_prior;
};

enum class NoiseLevel { high, medium, low };

enum class TestSurface { rosenbrock, pinter, goldstein, branin, ackley, hyperellipsoid, rastrigin, camelback };

// Pre-coded generators.

ProblemInstance make_bubeck(int variant);
ProblemInstance make_auf(NoiseLevel level, double theta1 = 1.0, double theta2 = 0.2);
ProblemDraw make_equal_prior(Rng& rng);
ProblemInstance make_test_surface(TestSurface surface);
/// GPR(sigma, beta; m). `noise_var` defaults to sigma when not given.
ProblemDraw make_gpr(double sigma, double beta, std::size_t m, Rng& rng,
                     std::optional<double> noise_var = std::nullopt);

/// User-defined truth from CSV: header `arm_index,coord_1..coord_d,mu,beta_w`.
ProblemInstance load_truth_csv(const std::filesystem::path& path);

double sample_observation(const ProblemInstance& problem, std::size_t arm, Rng& rng);

/// Raw (unflipped) test-surface value f(x, y).
double test_surface_value(TestSurface surface, double x, double y);

struct SurfaceGrid {
  double x_lo, x_hi, y_lo, y_hi;
  std::size_t nx, ny;
};
SurfaceGrid surface_grid(TestSurface surface);

/// E[theta1 * min(x, xi) - theta2 * x] and its variance for xi ~ N(m, s^2).
double auf_mean(const AufModel& model, double x);
double auf_variance(const AufModel& model, double x);

// Registry addressed by config-file names.

struct ProblemClassSpec {
  std::string name;                  ///< canonical name, e.g. "Bubeck3", "GPR", "AUF_LNoise"
  std::vector<double> params;        ///< GPR(sigma, beta; M[; noise]) parameters
  std::filesystem::path truth_file;  ///< user-defined truth CSV
};

/// Parses a problem token such as `Bubeck1`, `AUF_HNoise`, `GPR(50, 0.45;100)`
/// or `path/to/truth.csv`. Throws InvalidArgument for unknown names or
/// wrong parameter arity.
ProblemClassSpec parse_problem_class(std::string_view token);

/// Config-file spelling of a problem class, stable under re-parsing.
std::string problem_label(const ProblemClassSpec& spec);

bool has_default_prior(const ProblemClassSpec& spec);

/// Whether every instance of the class is identical (no truth randomness).
bool is_deterministic(const ProblemClassSpec& spec);

ProblemDraw make_problem(const ProblemClassSpec& spec, Rng& rng);

}  // namespace molte
