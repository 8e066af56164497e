#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "molte/error.hpp"
#include "molte/problems.hpp"

using namespace molte;

namespace {

// E[t1 min(x, xi) - t2 x] for xi ~ N(m, s^2) by trapezoidal quadrature.
double auf_mean_quadrature(double x, double m, double s, double t1, double t2) {
  const int steps = 200000;
  const double lo = m - 12.0 * s, hi = m + 12.0 * s, h = (hi - lo) / steps;
  double acc = 0.0;
  for (int i = 0; i <= steps; ++i) {
    const double xi = lo + h * i;
    const double dens = std::exp(-0.5 * std::pow((xi - m) / s, 2)) / (s * std::sqrt(2.0 * M_PI));
    const double w = (i == 0 || i == steps) ? 0.5 : 1.0;
    acc += w * dens * std::min(x, xi);
  }
  return t1 * acc * h - t2 * x;
}

}  // namespace

TEST_CASE("Bubeck layouts") {
  const auto b1 = make_bubeck(1);
  REQUIRE(b1.size() == 20);
  CHECK(b1.mu(0) == 0.5);
  for (int i = 1; i < 20; ++i) CHECK(b1.mu(i) == 0.4);
  CHECK(b1.reward_kind == RewardKind::bernoulli);

  const auto b5 = make_bubeck(5);
  REQUIRE(b5.size() == 15);
  CHECK(b5.mu(1) == doctest::Approx(0.45));
  CHECK(b5.mu(14) == doctest::Approx(0.125));

  const auto b3 = make_bubeck(3);
  REQUIRE(b3.size() == 4);
  CHECK(b3.mu(1) == doctest::Approx(0.3631));
  CHECK(b3.mu(2) == doctest::Approx(0.5 - 0.37 * 0.37 * 0.37));
  CHECK(b3.mu(3) == doctest::Approx(0.5 - std::pow(0.37, 4)));

  const auto b2 = make_bubeck(2);
  CHECK(b2.mu(5) == 0.42);
  CHECK(b2.mu(6) == 0.38);
  const auto b4 = make_bubeck(4);
  CHECK(b4.size() == 6);
  CHECK(b4.mu(1) == 0.42);
  CHECK(b4.mu(3) == 0.4);
  CHECK(b4.mu(5) == 0.35);
  const auto b6 = make_bubeck(6);
  CHECK(b6.mu(1) == 0.48);
  CHECK(b6.mu(19) == 0.37);
  const auto b7 = make_bubeck(7);
  CHECK(b7.size() == 30);
  CHECK(b7.mu(5) == 0.45);
  CHECK(b7.mu(19) == 0.43);
  CHECK(b7.mu(29) == 0.38);

  CHECK_THROWS_AS(make_bubeck(0), InvalidArgument);
  CHECK_THROWS_AS(make_bubeck(8), InvalidArgument);
}

TEST_CASE("every Bubeck variant has a unique best arm 0 at 0.5") {
  for (int v = 1; v <= 7; ++v) {
    const auto p = make_bubeck(v);
    CHECK(p.mu(0) == 0.5);
    for (std::size_t i = 1; i < p.size(); ++i) CHECK(p.mu(static_cast<Eigen::Index>(i)) < 0.5);
    CHECK(p.beta_w.minCoeff() == 4.0);
    CHECK(p.beta_w.maxCoeff() == 4.0);
  }
}

TEST_CASE("AUF geometry and truth") {
  const double ratios[] = {0.5, 0.4, 0.3};
  const NoiseLevel levels[] = {NoiseLevel::high, NoiseLevel::medium, NoiseLevel::low};
  for (int k = 0; k < 3; ++k) {
    const auto p = make_auf(levels[k]);
    REQUIRE(p.size() == 100);
    CHECK(p.coords(0, 0) == 21.0);
    CHECK(p.coords(99, 0) == 120.0);
    REQUIRE(p.auf);
    CHECK(p.auf->xi_std == doctest::Approx(ratios[k] * 60.0));
    for (int x : {21, 50, 60, 90, 120}) {
      CHECK(p.mu(x - 21) == doctest::Approx(auf_mean_quadrature(x, 60.0, ratios[k] * 60.0, 1.0, 0.2)).epsilon(1e-7));
    }
    // Unimodal with an interior maximizer.
    Eigen::Index best = 0;
    p.mu.maxCoeff(&best);
    CHECK(best > 0);
    CHECK(best < 99);
  }
}

TEST_CASE("AUF mean tends to x as the demand noise vanishes") {
  AufModel m{1.0, 0.0, 60.0, 1e-6};
  CHECK(auf_mean(m, 21.0) == doctest::Approx(21.0).epsilon(1e-12));
  CHECK_THROWS_AS(make_auf(NoiseLevel::low, 1.0, 1.5), InvalidArgument);
}

TEST_CASE("AUF observations average to the closed-form mean") {
  const auto p = make_auf(NoiseLevel::medium);
  Rng rng(3);
  const int n = 100000;
  for (std::size_t arm : {0u, 40u, 99u}) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += sample_observation(p, arm, rng);
    const double sd = 1.0 / std::sqrt(p.beta_w(static_cast<Eigen::Index>(arm)));
    CHECK(std::abs(s / n - p.mu(static_cast<Eigen::Index>(arm))) < 4.0 * sd / std::sqrt(n));
  }
}

TEST_CASE("Equal-prior problem") {
  Rng rng(1);
  const auto d = make_equal_prior(rng);
  REQUIRE(d.instance.size() == 100);
  CHECK(d.instance.mu.minCoeff() >= 0.0);
  CHECK(d.instance.mu.maxCoeff() <= 60.0);
  CHECK(d.instance.beta_w(7) == doctest::Approx(1e-4));
  REQUIRE(d.default_prior);
  CHECK(d.default_prior->mean(3) == 30.0);
  CHECK(d.default_prior->stddev(3) == doctest::Approx(10.0));
}

TEST_CASE("test surfaces") {
  const auto branin = make_test_surface(TestSurface::branin);
  CHECK(branin.size() == 225);
  CHECK(branin.coords(0, 0) == -5.0);
  CHECK(branin.coords(0, 1) == 0.0);
  CHECK(branin.coords(224, 0) == 10.0);
  CHECK(branin.coords(224, 1) == 15.0);
  CHECK(branin.coords(1, 0) == -5.0);  // x outer, y inner
  CHECK(make_test_surface(TestSurface::rastrigin).size() == 121);
  for (auto s : {TestSurface::rosenbrock, TestSurface::pinter, TestSurface::goldstein, TestSurface::ackley,
                 TestSurface::hyperellipsoid, TestSurface::camelback}) {
    CHECK(make_test_surface(s).size() == 169);
  }

  const auto he = make_test_surface(TestSurface::hyperellipsoid);
  // Origin is the centre of the 13x13 grid on [-3,3]^2.
  CHECK(he.coords(84, 0) == 0.0);
  CHECK(he.coords(84, 1) == 0.0);
  CHECK(he.mu(84) == he.mu.maxCoeff());
  CHECK(he.mu(84) == doctest::Approx(3.0 * 3.0 + 2.0 * 3.0 * 3.0));

  CHECK(test_surface_value(TestSurface::rastrigin, 0.0, 0.0) == doctest::Approx(0.0));
  CHECK(test_surface_value(TestSurface::rastrigin, 1.0, 1.0) == doctest::Approx(2.0));
  CHECK(test_surface_value(TestSurface::branin, M_PI, 2.275) == doctest::Approx(0.397887).epsilon(1e-5));
  CHECK(test_surface_value(TestSurface::goldstein, 0.0, -1.0) == doctest::Approx(3.0));
  CHECK(test_surface_value(TestSurface::rosenbrock, 1.0, 1.0) == 0.0);
  CHECK(test_surface_value(TestSurface::camelback, 0.0898, -0.7126) == doctest::Approx(-1.0316).epsilon(1e-4));
  CHECK(test_surface_value(TestSurface::ackley, 0.0, 0.0) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("flipped surfaces span [0, range] and use 20 percent noise") {
  for (auto s : {TestSurface::rosenbrock, TestSurface::pinter, TestSurface::goldstein, TestSurface::branin,
                 TestSurface::ackley, TestSurface::hyperellipsoid, TestSurface::rastrigin, TestSurface::camelback}) {
    const auto p = make_test_surface(s);
    CHECK(p.mu.minCoeff() == 0.0);
    const double sd = 1.0 / std::sqrt(p.beta_w(0));
    CHECK(sd == doctest::Approx(0.2 * p.mu.maxCoeff()).epsilon(1e-12));
    const auto again = make_test_surface(s);
    CHECK(again.mu == p.mu);
    CHECK(again.coords == p.coords);
  }
}

TEST_CASE("GPR construction") {
  Rng rng(4);
  const auto d = make_gpr(50.0, 0.45, 100, rng);
  REQUIRE(d.instance.size() == 100);
  REQUIRE(d.default_prior);
  const auto& s = d.default_prior->covariance();
  for (int i = 0; i < 100; ++i) CHECK(s(i, i) == 50.0);
  CHECK(s(0, 1) == doctest::Approx(31.88).epsilon(1e-3));
  CHECK(s(0, 1) == doctest::Approx(50.0 * std::exp(-0.45)));
  CHECK(d.instance.beta_w(0) == doctest::Approx(1.0 / 50.0));

  Rng rng2(4);
  const auto wide = make_gpr(50.0, 1e3, 5, rng2);
  const auto& w = wide.default_prior->covariance();
  CHECK(w(0, 1) < 1e-300);
  CHECK_THROWS_AS(make_gpr(-1.0, 1.0, 4, rng), InvalidArgument);
  CHECK_THROWS_AS(make_gpr(1.0, 1.0, 1, rng), InvalidArgument);
}

TEST_CASE("GPR truths are distributed as N(theta0, Sigma0)") {
  const int n = 10000;
  const int m = 4;
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(m);
  Eigen::MatrixXd outer = Eigen::MatrixXd::Zero(m, m);
  Eigen::MatrixXd sigma;
  for (int i = 0; i < n; ++i) {
    Rng rng(1000 + i);
    const auto d = make_gpr(2.0, 0.5, m, rng);
    const Eigen::VectorXd r = d.instance.mu - d.default_prior->mean();
    sum += r;
    outer += r * r.transpose();
    sigma = d.default_prior->covariance();
  }
  const Eigen::VectorXd mean = sum / n;
  const Eigen::MatrixXd cov = (outer - n * mean * mean.transpose()) / (n - 1);
  for (int i = 0; i < m; ++i) {
    CHECK(std::abs(mean(i)) < 5.0 * std::sqrt(2.0 / n));
    for (int j = 0; j < m; ++j) {
      const double se = std::sqrt((sigma(i, i) * sigma(j, j) + sigma(i, j) * sigma(i, j)) / n);
      CHECK(std::abs(cov(i, j) - sigma(i, j)) < 5.0 * se);
    }
  }
}

TEST_CASE("observation sampling") {
  Rng rng(8);
  ProblemInstance p;
  p.mu = Eigen::Vector2d(1.0, 0.3);
  p.beta_w = Eigen::Vector2d(4.0, 4.0);
  p.coords = Eigen::MatrixXd::Zero(2, 1);
  p.reward_kind = RewardKind::bernoulli;
  for (int i = 0; i < 1000; ++i) CHECK(sample_observation(p, 0, rng) == 1.0);

  p.reward_kind = RewardKind::gaussian;
  p.beta_w(1) = INFINITY;
  CHECK(sample_observation(p, 1, rng) == 0.3);

  p.beta_w(0) = 0.25;
  const int n = 100000;
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += sample_observation(p, 0, rng);
  CHECK(std::abs(s / n - 1.0) < 4.0 * 2.0 / std::sqrt(n));
  CHECK_THROWS_AS(sample_observation(p, 2, rng), InvalidArgument);
}

TEST_CASE("problem registry") {
  const auto g = parse_problem_class("GPR(50, 0.45;100)");
  CHECK(g.name == "GPR");
  REQUIRE(g.params.size() == 3);
  CHECK(g.params[2] == 100.0);
  CHECK(problem_label(g) == "GPR(50,0.45;100)");
  CHECK(problem_label(parse_problem_class(problem_label(g))) == problem_label(g));
  CHECK(parse_problem_class("bubeck3").name == "Bubeck3");
  CHECK(parse_problem_class("AUF_HNoise").name == "AUF_HNoise");
  CHECK(parse_problem_class("branin").name == "Branin");
  CHECK(has_default_prior(g));
  CHECK_FALSE(has_default_prior(parse_problem_class("Bubeck1")));
  CHECK(is_deterministic(parse_problem_class("Bubeck1")));
  CHECK_THROWS_AS(parse_problem_class("Bubeck9"), InvalidArgument);
  CHECK_THROWS_AS(parse_problem_class("NanoDesign"), InvalidArgument);
  CHECK_THROWS_AS(parse_problem_class("GPR(50)"), InvalidArgument);
  CHECK_THROWS_AS(parse_problem_class("Bubeck1(3)"), InvalidArgument);

  Rng a(1), b(99);
  CHECK(make_problem(parse_problem_class("Bubeck2"), a).instance.mu ==
        make_problem(parse_problem_class("Bubeck2"), b).instance.mu);
}

TEST_CASE("truth CSV loading") {
  const auto dir = std::filesystem::temp_directory_path() / "molte_truth_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream f(dir / "tiny.csv");
    f << "arm_index,coord_1,mu,beta_w\n1,0,1.5,2\n2,1,0.5,2\n3,2,1.0,4\n";
  }
  const auto p = load_truth_csv(dir / "tiny.csv");
  CHECK(p.size() == 3);
  CHECK(p.dims() == 1);
  CHECK(p.mu(0) == 1.5);
  CHECK(p.beta_w(2) == 4.0);
  const auto spec = parse_problem_class((dir / "tiny.csv").string());
  CHECK(spec.name == "File");
  Rng rng(0);
  CHECK(make_problem(spec, rng).instance.mu == p.mu);
  {
    std::ofstream f(dir / "bad.csv");
    f << "arm_index,coord_1,mu,beta_w\n1,0,1.5,2\n2,1,0.5,-1\n";
  }
  CHECK_THROWS_AS(load_truth_csv(dir / "bad.csv"), InvalidArgument);
  std::filesystem::remove_all(dir);
}
