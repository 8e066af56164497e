// One PASS/FAIL line per acceptance criterion. Exit status is the number of
// failed criteria.

#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <string>

#include "molte/belief.hpp"
#include "molte/cli.hpp"
#include "molte/harness.hpp"
#include "molte/log.hpp"
#include "molte/metrics.hpp"
#include "molte/policies.hpp"
#include "molte/report.hpp"
#include "support/aggregate.hpp"
#include "support/monte_carlo.hpp"
#include "support/oracles.hpp"
#include "support/tree.hpp"

namespace fs = std::filesystem;
using namespace molte;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "molte_acceptance" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

// ---- AC1 ------------------------------------------------------------------

Outcome ac1() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> beta_dist(0.1, 10.0);
  double worst = 0.0;
  for (int rep = 0; rep < 1000; ++rep) {
    const std::size_t m = 2 + rng() % 11;
    const MatrixXd sigma = test::random_spd(m, rng);
    const VectorXd theta = test::random_vector(m, rng);
    const std::size_t x = rng() % m;
    const double w = std::normal_distribution<double>(0.0, 3.0)(rng);
    const double beta = beta_dist(rng);
    VectorXd beta_w = VectorXd::Constant(static_cast<Eigen::Index>(m), 1.0);
    beta_w(static_cast<Eigen::Index>(x)) = beta;
    const GaussianBelief post = update_correlated(GaussianBelief::correlated(theta, sigma), {x, w}, beta_w);
    const test::DirectPosterior ref = test::direct_update(theta, sigma, x, w, beta);
    worst = std::max({worst, test::max_rel_diff(post.mean(), ref.mean), test::max_rel_diff(post.covariance(), ref.covariance)});
  }
  const double t = seconds_since(t0);
  return {worst <= 1e-10 && t < 5.0, "max rel err " + fmt(worst) + ", " + fmt(t, 3) + " s"};
}

// ---- AC2 ------------------------------------------------------------------

Outcome ac2() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(102);
  std::uniform_real_distribution<double> var_dist(0.05, 4.0), beta_dist(0.2, 5.0);
  std::size_t checks = 0, misses = 0;
  double worst_z = 0.0;
  auto check = [&](double nu, const test::Estimate& mc) {
    ++checks;
    const double z = std::abs(nu - mc.mean) / mc.se;
    worst_z = std::max(worst_z, z);
    if (!(std::abs(nu - mc.mean) <= 3.0 * mc.se)) ++misses;
  };
  for (int state = 0; state < 100; ++state) {
    const std::vector<double> z = test::stratified_normals(1000000, rng);
    const std::size_t m = 2 + rng() % 7;
    const auto k = static_cast<Eigen::Index>(m);
    VectorXd var(k), beta(k);
    for (Eigen::Index i = 0; i < k; ++i) {
      var(i) = var_dist(rng);
      beta(i) = beta_dist(rng);
    }
    const VectorXd theta = test::random_vector(m, rng, 1.0);
    const VectorXd nu = kg_values_independent(GaussianBelief::independent(theta, var), beta);
    const std::vector<double> a(theta.data(), theta.data() + m);
    for (Eigen::Index x = 0; x < k; ++x) {
      std::vector<double> slope(m, 0.0);
      slope[static_cast<std::size_t>(x)] = var(x) / std::sqrt(var(x) + 1.0 / beta(x));
      check(nu(x), test::expected_max_gain(a, slope, z));
    }

    // Correlated state of the same size, scalar-Gaussian oracle per arm.
    const MatrixXd s = test::random_spd(m, rng);
    const VectorXd nu_cb = kg_values_correlated(GaussianBelief::correlated(theta, s), beta);
    for (Eigen::Index x = 0; x < k; ++x) {
      std::vector<double> slope(m);
      const double denom = std::sqrt(s(x, x) + 1.0 / beta(x));
      for (Eigen::Index i = 0; i < k; ++i) slope[static_cast<std::size_t>(i)] = s(i, x) / denom;
      check(nu_cb(x), test::expected_max_gain(a, slope, z));
    }
  }
  const double t = seconds_since(t0);
  return {misses == 0 && t < 120.0, std::to_string(checks) + " arm checks, " + std::to_string(misses) +
                                        " outside 3 SE, worst " + fmt(worst_z, 3) + " SE, " + fmt(t, 3) + " s"};
}

// ---- AC3 ------------------------------------------------------------------

Outcome ac3() {
  std::size_t cases = 0, bad = 0;
  std::string first;
  for (std::uint64_t m = 2; m <= 20; ++m) {
    // 1/2 + sum_{i=2}^m 1/i = p / q exactly.
    std::uint64_t p = 1, q = 2;
    for (std::uint64_t i = 2; i <= m; ++i) {
      p = p * i + q;
      q = q * i;
      const std::uint64_t g = std::gcd(p, q);
      p /= g;
      q /= g;
    }
    for (std::uint64_t n = m; n <= 500; ++n) {
      ++cases;
      const std::vector<std::size_t> s = sr_schedule(m, n);
      bool ok = s.size() == m - 1;
      std::uint64_t total = 0;
      for (std::uint64_t k = 1; ok && k < m; ++k) {
        const std::uint64_t top = (n - m) * q, bottom = p * (m + 1 - k);
        const std::uint64_t expect = (top + bottom - 1) / bottom;
        ok = s[k - 1] == expect;
        total += expect;
      }
      if (ok) total += s.back();
      ok = ok && total <= n && sr_total_pulls(m, s) == total;
      if (!ok) {
        ++bad;
        if (first.empty()) first = " (first: M=" + std::to_string(m) + ", n=" + std::to_string(n) + ")";
      }
    }
  }
  return {bad == 0, std::to_string(cases) + " (M, n) pairs, " + std::to_string(bad) + " mismatches" + first};
}

// ---- AC4 and AC9 -----------------------------------------------------------

int run_cli_args(std::vector<std::string> args) {
  args.insert(args.begin(), "molte");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

const char* kFourRows = R"cfg(num_truth = 5
num_p_tune = 20

[[row]]
problem = "Bubeck1"
prior = "Uninform"
budget = 5
belief = "independent"
objective = "offline"
policies = ["KG", "IE(*)", "UCBE(*)", "SR", "TS", "EXPL"]

[[row]]
problem = "Bubeck3"
prior = "Uninform"
budget = 10
belief = "independent"
objective = "online"
policies = ["OLKG", "UCB", "UCBV", "KLUCB", "EXPT"]

[[row]]
problem = "GPR(50,0.45;25)"
prior = "Default"
budget = 2
belief = "correlated"
objective = "offline"
policies = ["KGCB", "Kriging", "IE(2)", "TS"]

[[row]]
problem = "AUF_HNoise"
prior = "MLE"
budget = 2
belief = "independent"
objective = "offline"
policies = ["KG", "IE(*)", "EXPL"]
)cfg";

fs::path ac4_dir;

Outcome ac4() {
  const auto t0 = Clock::now();
  ac4_dir = scratch("determinism");
  test::write_file(ac4_dir / "four_rows.toml", kFourRows);
  const std::string cfg = (ac4_dir / "four_rows.toml").string();
  const int a = run_cli_args({"--config", cfg, "--out", (ac4_dir / "w1").string(), "--seed", "42", "--num-p", "20",
                              "--workers", "1"});
  const int b = run_cli_args({"--config", cfg, "--out", (ac4_dir / "w8").string(), "--seed", "42", "--num-p", "20",
                              "--workers", "8"});
  if (a != 0 || b != 0) return {false, "exit codes " + std::to_string(a) + ", " + std::to_string(b)};
  const auto t1 = test::read_tree(ac4_dir / "w1");
  const auto diff = test::tree_differences(t1, test::read_tree(ac4_dir / "w8"));
  return {diff.empty() && t1.size() > 80, std::to_string(t1.size()) + " files, " + std::to_string(diff.size()) +
                                              " differences" + (diff.empty() ? "" : " (first: " + diff.front() + ")") +
                                              ", " + fmt(seconds_since(t0), 3) + " s"};
}

Outcome ac9() {
  if (ac4_dir.empty()) (void)ac4();  // reuses the determinism run's output
  if (!fs::exists(ac4_dir / "w1")) return {false, "no output tree"};
  std::size_t folders = 0;
  std::vector<std::string> issues;
  for (const auto& e : fs::directory_iterator(ac4_dir / "w1")) {
    if (!e.is_directory()) continue;
    ++folders;
    for (auto& s : test::compare_with_reports(e.path())) issues.push_back(e.path().filename().string() + ": " + s);
  }
  return {folders == 4 && issues.empty(), std::to_string(folders) + " problem folders, " +
                                              std::to_string(issues.size()) + " mismatches" +
                                              (issues.empty() ? "" : " (first: " + issues.front() + ")")};
}

// ---- AC5 and AC6 -----------------------------------------------------------

struct Ci {
  double mean, lo, hi;
};

// Percentile bootstrap of the mean.
Ci bootstrap(const std::vector<double>& v, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, v.size() - 1);
  std::vector<double> means(10000);
  for (double& m : means) {
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) s += v[pick(rng)];
    m = s / static_cast<double>(v.size());
  }
  std::sort(means.begin(), means.end());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  return {mean, means[249], means[9749]};
}

// Per-trial normalized OC of every policy against the first one.
std::vector<std::vector<double>> normalized_vs_first(const std::string& problem, double ratio,
                                                     const std::vector<std::string>& policies, std::uint64_t seed) {
  ExperimentConfig c;
  c.problem = parse_problem_class(problem);
  c.objective = Objective::online;
  c.budget_ratio = ratio;
  for (const auto& p : policies) c.policies.push_back(parse_policy_token(p));
  c.num_p = 200;
  c.num_truth = 10;
  c.num_p_tune = 100;
  c.master_seed = seed;
  const auto params = resolve_parameters(c);
  const auto trials = run_experiment(c, params);
  return normalized_oc_vs_reference(episode_records(trials), policies.size(), c.num_p, c.num_truth);
}

Outcome ac5() {
  const auto t0 = Clock::now();
  bool ok = true;
  std::string detail;
  for (const char* problem : {"Bubeck1", "Bubeck5", "Bubeck6", "Bubeck7"}) {
    const auto series = normalized_vs_first(problem, 10, {"OLKG", "EXPL", "IE(*)"}, 2024);
    const Ci expl = bootstrap(series[1], 1);
    ok = ok && expl.lo > 0.0;
    detail += std::string(problem) + " EXPL " + fmt(expl.mean, 3) + " [" + fmt(expl.lo, 3) + ", " + fmt(expl.hi, 3) + "]";
    if (std::string(problem) == "Bubeck1") {
      const Ci ie = bootstrap(series[2], 2);
      ok = ok && ie.hi <= 0.02;
      detail += ", IE(*) " + fmt(ie.mean, 3) + " [" + fmt(ie.lo, 3) + ", " + fmt(ie.hi, 3) + "]";
    }
    detail += "; ";
  }
  const double t = seconds_since(t0);
  return {ok && t < 600.0, detail + fmt(t, 3) + " s"};
}

Outcome ac6() {
  const auto t0 = Clock::now();
  bool ok = true;
  std::string detail;
  for (int b = 1; b <= 7; ++b) {
    const std::string problem = "Bubeck" + std::to_string(b);
    const auto series = normalized_vs_first(problem, 100, {"OLKG", "UCB"}, 2025);
    const Ci ucb = bootstrap(series[1], 3);
    ok = ok && ucb.lo > 0.0;
    detail += problem + " " + fmt(ucb.mean, 3) + " [" + fmt(ucb.lo, 3) + ", " + fmt(ucb.hi, 3) + "]; ";
  }
  return {ok, detail + fmt(seconds_since(t0), 3) + " s"};
}

// ---- AC7 -------------------------------------------------------------------

Outcome ac7() {
  const fs::path dir = scratch("tuner");
  // Gaps comparable to the noise and 1000 tuning episodes give a curve with
  // one clear interior peak. Near-equal arms make the curve a noisy step
  // function whose maximum is set by single episodes.
  test::write_file(dir / "three_arms.csv", "arm_index,coord_1,mu,beta_w\n1,1,0,1\n2,2,0.5,1\n3,3,1,1\n");
  bool ok = true;
  std::string detail;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    ExperimentConfig c;
    c.problem = parse_problem_class((dir / "three_arms.csv").string());
    c.objective = Objective::online;
    c.budget_ratio = 20;
    c.policies = {parse_policy_token("IE(*)")};
    c.num_p_tune = 1000;
    c.master_seed = seed;
    const double chosen = tune_policy(c, 0).best;

    const int points = 400;
    const double lo = std::log10(c.grid.lo), hi = std::log10(c.grid.hi);
    std::vector<double> z(points), value(points);
    for (int i = 0; i < points; ++i) {
      z[i] = std::pow(10.0, lo + (hi - lo) * i / (points - 1));
      value[i] = tuning_objective(c, PolicyKind::ie, z[i]);
    }
    const double best = *std::max_element(value.begin(), value.end());
    const double step = (hi - lo) / (c.grid.points - 1) * 2.0 / (c.grid.refine_points - 1);
    double nearest = INFINITY;
    for (int i = 0; i < points; ++i)
      if (value[i] == best) nearest = std::min(nearest, std::abs(std::log10(chosen) - std::log10(z[i])));
    const bool hit = nearest <= step + 1e-12;
    ok = ok && hit;
    detail += "seed " + std::to_string(seed) + ": z=" + fmt(chosen, 4) + " off " + fmt(nearest, 3) + " dec; ";
  }
  return {ok, detail};
}

// ---- AC8 -------------------------------------------------------------------

Outcome ac8() {
  doctest::Context ctx;
  ctx.setOption("test-case",
                "choices are invariant to shifting every estimate,"
                "forced initialization enumerates every arm once,"
                "KG values are never negative,"
                "KGCB on a diagonal covariance equals KG exactly,"
                "budget conservation and overrun");
  ctx.setOption("minimal", true);
  const int failures = ctx.run();
  return {failures == 0, "5 property suites x 1000 cases, doctest status " + std::to_string(failures)};
}

}  // namespace

int main(int argc, char** argv) {
  set_log_sink([](LogLevel level, std::string_view message) {
    if (level != LogLevel::info) std::fprintf(stderr, "warning: %.*s\n", static_cast<int>(message.size()), message.data());
  });
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"AC1 correlated update vs direct inversion", ac1},
      {"AC2 KG and KGCB vs Monte Carlo", ac2},
      {"AC3 successive rejects schedule", ac3},
      {"AC4 determinism across worker counts", ac4},
      {"AC5 budget 10x sign reproduction", ac5},
      {"AC6 budget 100x sign reproduction", ac6},
      {"AC7 tuner vs fine-grid oracle", ac7},
      {"AC8 policy property suites", ac8},
      {"AC9 metrics recomputed from raw CSV", ac9},
  };
  // Optional arguments select criteria by prefix, e.g. `AC7`.
  auto selected = [&](const std::string& name) {
    if (argc < 2) return true;
    for (int i = 1; i < argc; ++i)
      if (name.rfind(std::string(argv[i]) + " ", 0) == 0) return true;
    return false;
  };
  int failed = 0;
  std::size_t ran = 0;
  for (const auto& [name, fn] : criteria) {
    if (!selected(name)) continue;
    ++ran;
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failed, ran);
  return failed;
}
