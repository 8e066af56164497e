#include "molte/problems.hpp"

#include <cmath>
#include <map>
#include <string>

#include "molte/csv.hpp"
#include "molte/error.hpp"
#include "molte/numeric.hpp"
#include "text_util.hpp"

namespace molte {
namespace {

constexpr double kBernoulliPrecision = 1.0 / 0.25;

Eigen::MatrixXd index_coords(std::size_t m, double first = 1.0) {
  Eigen::MatrixXd c(static_cast<Eigen::Index>(m), 1);
  for (std::size_t i = 0; i < m; ++i) c(static_cast<Eigen::Index>(i), 0) = first + static_cast<double>(i);
  return c;
}

// Fills 1-based arm range [from, to] with value.
void fill(Eigen::VectorXd& mu, int from, int to, double value) {
  for (int i = from; i <= to; ++i) mu(i - 1) = value;
}

double noise_ratio(NoiseLevel level) {
  switch (level) {
    case NoiseLevel::high: return 0.5;
    case NoiseLevel::medium: return 0.4;
    case NoiseLevel::low: return 0.3;
  }
  return 0.3;
}

const char* noise_suffix(NoiseLevel level) {
  switch (level) {
    case NoiseLevel::high: return "HNoise";
    case NoiseLevel::medium: return "MNoise";
    case NoiseLevel::low: return "LNoise";
  }
  return "LNoise";
}

Eigen::MatrixXd cholesky_with_jitter(const Eigen::MatrixXd& cov) {
  const double scale = cov.diagonal().mean();
  for (double jitter : {0.0, 1e-12, 1e-10, 1e-8}) {
    Eigen::MatrixXd a = cov;
    a.diagonal().array() += jitter * scale;
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() == Eigen::Success) return llt.matrixL();
  }
  throw NumericalError("covariance is not positive definite after jitter");
}

}  // namespace

ProblemInstance make_bubeck(int variant) {
  int m = 0;
  switch (variant) {
    case 1: case 2: case 6: m = 20; break;
    case 3: m = 4; break;
    case 4: m = 6; break;
    case 5: m = 15; break;
    case 7: m = 30; break;
    default: throw InvalidArgument("unknown Bubeck variant " + std::to_string(variant));
  }
  Eigen::VectorXd mu(m);
  mu(0) = 0.5;
  switch (variant) {
    case 1:
      fill(mu, 2, 20, 0.4);
      break;
    case 2:
      fill(mu, 2, 6, 0.42);
      fill(mu, 7, 20, 0.38);
      break;
    case 3:
      for (int i = 2; i <= 4; ++i) mu(i - 1) = 0.5 - std::pow(0.37, i);
      break;
    case 4:
      mu(1) = 0.42;
      fill(mu, 3, 4, 0.4);
      fill(mu, 5, 6, 0.35);
      break;
    case 5:
      for (int i = 2; i <= 15; ++i) mu(i - 1) = 0.5 - 0.025 * i;
      break;
    case 6:
      mu(1) = 0.48;
      fill(mu, 3, 20, 0.37);
      break;
    case 7:
      fill(mu, 2, 6, 0.45);
      fill(mu, 7, 20, 0.43);
      fill(mu, 21, 30, 0.38);
      break;
  }
  ProblemInstance p;
  p.name = "Bubeck" + std::to_string(variant);
  p.mu = mu;
  p.beta_w = Eigen::VectorXd::Constant(m, kBernoulliPrecision);
  p.coords = index_coords(static_cast<std::size_t>(m));
  p.reward_kind = RewardKind::bernoulli;
  return p;
}

double auf_mean(const AufModel& model, double x) {
  // min(x, xi) = x - (x - xi)^+ and E[u^+] = s * f((x - m) / s) for u ~ N(x - m, s^2).
  const double s = model.xi_std;
  const double shortfall = s > 0.0 ? s * kg_f((x - model.xi_mean) / s) : std::max(x - model.xi_mean, 0.0);
  return model.theta1 * (x - shortfall) - model.theta2 * x;
}

double auf_variance(const AufModel& model, double x) {
  const double s = model.xi_std;
  if (s <= 0.0) return 0.0;
  const double d = x - model.xi_mean;
  const double z = d / s;
  const double first = s * kg_f(z);
  const double second = (d * d + s * s) * normal_cdf(z) + d * s * normal_pdf(z);
  return model.theta1 * model.theta1 * std::max(second - first * first, 0.0);
}

ProblemInstance make_auf(NoiseLevel level, double theta1, double theta2) {
  if (!(theta1 > 0.0) || !(theta2 > 0.0) || !(theta2 < theta1)) {
    throw InvalidArgument("AUF requires 0 < theta2 < theta1");
  }
  constexpr std::size_t m = 100;
  AufModel model{theta1, theta2, 60.0, noise_ratio(level) * 60.0};
  ProblemInstance p;
  p.name = std::string("AUF_") + noise_suffix(level);
  p.coords = index_coords(m, 21.0);
  p.mu.resize(m);
  p.beta_w.resize(m);
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(m); ++i) {
    const double x = p.coords(i, 0);
    p.mu(i) = auf_mean(model, x);
    p.beta_w(i) = 1.0 / auf_variance(model, x);
  }
  p.reward_kind = RewardKind::auf;
  p.auf = model;
  return p;
}

ProblemDraw make_equal_prior(Rng& rng) {
  constexpr Eigen::Index m = 100;
  std::uniform_real_distribution<double> uniform(0.0, 60.0);
  ProblemDraw d;
  d.instance.name = "EqualPrior";
  d.instance.mu.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) d.instance.mu(i) = uniform(rng);
  d.instance.beta_w = Eigen::VectorXd::Constant(m, 1.0 / (100.0 * 100.0));
  d.instance.coords = index_coords(m);
  d.instance.reward_kind = RewardKind::gaussian;
  d.default_prior = GaussianBelief::independent(Eigen::VectorXd::Constant(m, 30.0),
                                                Eigen::VectorXd::Constant(m, 10.0 * 10.0));
  return d;
}

ProblemDraw make_gpr(double sigma, double beta, std::size_t m, Rng& rng, std::optional<double> noise_var) {
  if (!(sigma > 0.0) || !(beta > 0.0) || m < 2) {
    throw InvalidArgument("GPR requires sigma > 0, beta > 0 and at least two arms");
  }
  const double noise = noise_var.value_or(sigma);
  if (!(noise > 0.0)) throw InvalidArgument("GPR noise variance must be positive");
  const auto n = static_cast<Eigen::Index>(m);
  std::normal_distribution<double> normal(0.0, 1.0);

  Eigen::VectorXd theta0(n);
  for (Eigen::Index i = 0; i < n; ++i) theta0(i) = std::sqrt(sigma) * normal(rng);
  Eigen::MatrixXd cov(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      cov(i, j) = sigma * std::exp(-beta * std::abs(static_cast<double>(i - j)));
    }
  }
  const Eigen::MatrixXd chol = cholesky_with_jitter(cov);
  Eigen::VectorXd z(n);
  for (Eigen::Index i = 0; i < n; ++i) z(i) = normal(rng);

  ProblemDraw d;
  d.instance.name = "GPR";
  d.instance.mu = theta0 + chol * z;
  d.instance.beta_w = Eigen::VectorXd::Constant(n, 1.0 / noise);
  d.instance.coords = index_coords(m);
  d.instance.reward_kind = RewardKind::gaussian;
  d.default_prior = GaussianBelief::correlated(theta0, cov);
  return d;
}

ProblemInstance load_truth_csv(const std::filesystem::path& path) {
  const CsvTable table = read_csv(path);
  if (table.size() < 3) throw InvalidArgument(path.string() + ": truth CSV needs a header and two arms");
  const CsvRow& header = table.front();
  if (header.size() < 4 || detail::trim(header.front()) != "arm_index" ||
      detail::trim(header[header.size() - 2]) != "mu" || detail::trim(header.back()) != "beta_w") {
    throw InvalidArgument(path.string() + ": header must be arm_index,coord_1..coord_d,mu,beta_w");
  }
  const std::size_t d = header.size() - 3;
  for (std::size_t k = 0; k < d; ++k) {
    if (detail::trim(header[k + 1]) != "coord_" + std::to_string(k + 1)) {
      throw InvalidArgument(path.string() + ": expected column coord_" + std::to_string(k + 1));
    }
  }
  const auto m = static_cast<Eigen::Index>(table.size() - 1);
  ProblemInstance p;
  p.name = path.stem().string();
  p.mu.resize(m);
  p.beta_w.resize(m);
  p.coords.resize(m, static_cast<Eigen::Index>(d));
  for (Eigen::Index r = 0; r < m; ++r) {
    const CsvRow& row = table[static_cast<std::size_t>(r) + 1];
    if (row.size() != header.size()) {
      throw InvalidArgument(path.string() + ": row " + std::to_string(r + 2) + " has the wrong column count");
    }
    if (parse_integer(row[0]) != r + 1) {
      throw InvalidArgument(path.string() + ": arm_index must run 1..M in order");
    }
    for (std::size_t k = 0; k < d; ++k) p.coords(r, static_cast<Eigen::Index>(k)) = parse_double(row[k + 1]);
    p.mu(r) = parse_double(row[d + 1]);
    p.beta_w(r) = parse_double(row[d + 2]);
    if (!std::isfinite(p.mu(r)) || !(p.beta_w(r) > 0.0)) {
      throw InvalidArgument(path.string() + ": mu must be finite and beta_w positive");
    }
  }
  p.reward_kind = RewardKind::gaussian;
  return p;
}

double sample_observation(const ProblemInstance& problem, std::size_t arm, Rng& rng) {
  if (arm >= problem.size()) throw InvalidArgument("arm out of range");
  const auto x = static_cast<Eigen::Index>(arm);
  switch (problem.reward_kind) {
    case RewardKind::bernoulli: {
      std::bernoulli_distribution coin(std::clamp(problem.mu(x), 0.0, 1.0));
      return coin(rng) ? 1.0 : 0.0;
    }
    case RewardKind::auf: {
      const AufModel& model = *problem.auf;
      std::normal_distribution<double> xi(model.xi_mean, model.xi_std);
      const double location = problem.coords(x, 0);
      return model.theta1 * std::min(location, xi(rng)) - model.theta2 * location;
    }
    case RewardKind::gaussian:
    default: {
      const double beta = problem.beta_w(x);
      if (std::isinf(beta)) return problem.mu(x);
      std::normal_distribution<double> noise(0.0, 1.0);
      return problem.mu(x) + noise(rng) / std::sqrt(beta);
    }
  }
}

// Registry.

namespace {

struct Entry {
  const char* canonical;
  std::size_t min_params = 0;
  std::size_t max_params = 0;
};

const std::map<std::string, Entry>& registry() {
  static const std::map<std::string, Entry> r = {
      {"bubeck1", {"Bubeck1"}},       {"bubeck2", {"Bubeck2"}},
      {"bubeck3", {"Bubeck3"}},       {"bubeck4", {"Bubeck4"}},
      {"bubeck5", {"Bubeck5"}},       {"bubeck6", {"Bubeck6"}},
      {"bubeck7", {"Bubeck7"}},       {"auf", {"AUF_LNoise"}},
      {"aufhnoise", {"AUF_HNoise"}},  {"aufmnoise", {"AUF_MNoise"}},
      {"auflnoise", {"AUF_LNoise"}},  {"equalprior", {"EqualPrior"}},
      {"rosenbrock", {"Rosenbrock"}}, {"pinter", {"Pinter"}},
      {"goldstein", {"Goldstein"}},   {"goldsteinprice", {"Goldstein"}},
      {"branin", {"Branin"}},         {"ackley", {"Ackley"}},
      {"hyperellipsoid", {"HyperEllipsoid"}},
      {"rastrigin", {"Rastrigin"}},   {"camelback", {"CamelBack"}},
      {"sixhumpcamelback", {"CamelBack"}},
      {"gpr", {"GPR", 3, 4}},
  };
  return r;
}

const std::map<std::string, TestSurface>& surfaces() {
  static const std::map<std::string, TestSurface> s = {
      {"Rosenbrock", TestSurface::rosenbrock}, {"Pinter", TestSurface::pinter},
      {"Goldstein", TestSurface::goldstein},   {"Branin", TestSurface::branin},
      {"Ackley", TestSurface::ackley},         {"HyperEllipsoid", TestSurface::hyperellipsoid},
      {"Rastrigin", TestSurface::rastrigin},   {"CamelBack", TestSurface::camelback},
  };
  return s;
}

const std::vector<double>& gpr_defaults() {
  static const std::vector<double> d = {50.0, 0.45, 100.0};
  return d;
}

}  // namespace

ProblemClassSpec parse_problem_class(std::string_view token) {
  token = detail::trim(token);
  if (token.empty()) throw InvalidArgument("empty problem class");
  ProblemClassSpec spec;
  if (detail::ends_with_ci(token, ".csv")) {
    spec.name = "File";
    spec.truth_file = std::filesystem::path(std::string(token));
    return spec;
  }
  std::string_view name = token;
  std::vector<double> params;
  bool has_params = false;
  if (const auto open = token.find('('); open != std::string_view::npos) {
    if (token.back() != ')') throw InvalidArgument("unbalanced parentheses in problem '" + std::string(token) + "'");
    name = detail::trim(token.substr(0, open));
    has_params = true;
    for (const std::string& piece : detail::split_any(token.substr(open + 1, token.size() - open - 2), ",;")) {
      params.push_back(parse_double(piece));
    }
  }
  const auto it = registry().find(detail::fold_name(name));
  if (it == registry().end()) throw InvalidArgument("unknown problem class '" + std::string(name) + "'");
  const Entry& entry = it->second;
  spec.name = entry.canonical;
  if (has_params) {
    if (params.size() < entry.min_params || params.size() > entry.max_params || entry.max_params == 0) {
      throw InvalidArgument("problem '" + spec.name + "' takes " +
                            (entry.max_params == 0 ? std::string("no parameters")
                                                   : std::to_string(entry.min_params) + " or " +
                                                         std::to_string(entry.max_params) + " parameters"));
    }
  }
  if (spec.name == "GPR") {
    spec.params = has_params ? params : gpr_defaults();
    const double m = spec.params[2];
    if (!(spec.params[0] > 0.0) || !(spec.params[1] > 0.0) || m < 2.0 || m != std::floor(m)) {
      throw InvalidArgument("GPR(sigma, beta; M) needs sigma > 0, beta > 0 and integer M >= 2");
    }
    if (spec.params.size() == 4 && !(spec.params[3] > 0.0)) {
      throw InvalidArgument("GPR noise variance must be positive");
    }
  }
  return spec;
}

std::string problem_label(const ProblemClassSpec& spec) {
  if (spec.name == "File") return spec.truth_file.string();
  if (spec.name != "GPR") return spec.name;
  std::string s = "GPR(" + format_double(spec.params[0]) + "," + format_double(spec.params[1]) + ";" +
                  format_double(spec.params[2]);
  if (spec.params.size() == 4) s += ";" + format_double(spec.params[3]);
  return s + ")";
}

bool has_default_prior(const ProblemClassSpec& spec) { return spec.name == "GPR" || spec.name == "EqualPrior"; }

bool is_deterministic(const ProblemClassSpec& spec) { return !has_default_prior(spec); }

ProblemDraw make_problem(const ProblemClassSpec& spec, Rng& rng) {
  const std::string& n = spec.name;
  if (n.rfind("Bubeck", 0) == 0) return {make_bubeck(n.back() - '0'), std::nullopt};
  if (n == "AUF_HNoise") return {make_auf(NoiseLevel::high), std::nullopt};
  if (n == "AUF_MNoise") return {make_auf(NoiseLevel::medium), std::nullopt};
  if (n == "AUF_LNoise") return {make_auf(NoiseLevel::low), std::nullopt};
  if (n == "EqualPrior") return make_equal_prior(rng);
  if (n == "GPR") {
    std::optional<double> noise;
    if (spec.params.size() == 4) noise = spec.params[3];
    return make_gpr(spec.params[0], spec.params[1], static_cast<std::size_t>(spec.params[2]), rng, noise);
  }
  if (n == "File") return {load_truth_csv(spec.truth_file), std::nullopt};
  if (const auto it = surfaces().find(n); it != surfaces().end()) return {make_test_surface(it->second), std::nullopt};
  throw InvalidArgument("unknown problem class '" + n + "'");
}

}  // namespace molte
