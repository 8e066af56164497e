#include <doctest.h>

#include <random>

#include "molte/config.hpp"
#include "molte/policies.hpp"

using namespace molte;

namespace {

const char* kTable = R"cfg(# three comparison rows
num_p = 20
num_truth = 4
seed = 7

[[row]]
problem = "Bubeck1"
prior = "Uninform"
budget = 10
belief = "independent"
objective = "offline"
num_policies = 3
policies = ["IE(1.7)", "UCBE(*)", "KG"]

[[row]]
problem = "GPR(50, 0.45; 100)"   # parameters inside a string
prior = "Default"
budget = 2.5
belief = "correlated"
objective = "online"
policies = ["KGCB", "TS"]

[[row]]
problem = "Branin"
prior = "MLE"
budget = 1
belief = "independent"
objective = "offline"
policies = ["EXPT", "SR"]
)cfg";

ConfigError config_error(std::string_view text, ConfigFormat format = ConfigFormat::toml) {
  try {
    (void)parse_config_text(text, format);
  } catch (const ConfigError& e) {
    return e;
  }
  FAIL("expected a ConfigError");
  return ConfigError(0, "", "");
}

std::string one_row(std::string_view problem, std::string_view prior, std::string_view policies,
                     std::string_view extra = "") {
  return "[[row]]\nproblem = \"" + std::string(problem) + "\"\nprior = \"" + std::string(prior) +
         "\"\nbudget = 5\nbelief = \"independent\"\nobjective = \"offline\"\n" + std::string(extra) +
         "policies = [" + std::string(policies) + "]\n";
}

}  // namespace

TEST_CASE("table format") {
  const ConfigFile cfg = parse_config_text(kTable, ConfigFormat::toml);
  CHECK(cfg.num_p == 20u);
  CHECK(cfg.num_truth == 4u);
  CHECK_FALSE(cfg.num_p_tune.has_value());
  CHECK(cfg.seed == 7u);
  REQUIRE(cfg.rows.size() == 3);

  const ConfigRow& r = cfg.rows[0];
  CHECK(r.problem.name == "Bubeck1");
  CHECK(r.prior == PriorMode::uninformative);
  CHECK(r.budget_ratio == 10.0);
  REQUIRE(r.policies.size() == 3);
  CHECK(r.policies[0].kind == PolicyKind::ie);
  CHECK(r.policies[0].directive.kind == ParamKind::fixed);
  CHECK(r.policies[0].directive.value == 1.7);
  CHECK(r.policies[1].kind == PolicyKind::ucbe);
  CHECK(r.policies[1].directive.kind == ParamKind::tune);
  CHECK(r.policies[2].kind == PolicyKind::kg);
  CHECK(r.policies[2].directive.kind == ParamKind::none);

  const ConfigRow& g = cfg.rows[1];
  CHECK(g.problem.name == "GPR");
  CHECK(g.problem.params == std::vector<double>{50, 0.45, 100});
  CHECK(g.prior == PriorMode::default_prior);
  CHECK(g.belief == BeliefMode::correlated);
  CHECK(g.objective == Objective::online);
  CHECK(cfg.rows[2].prior == PriorMode::mle);
}

TEST_CASE("errors name the row and column") {
  SUBCASE("unknown policy") {
    const auto e = config_error(one_row("Bubeck1", "Uninform", "\"KG\"") + one_row("Bubeck2", "Uninform", "\"KG\", \"Foo\""));
    CHECK(e.row() == 2);
    CHECK(e.column() == "policies");
  }
  SUBCASE("unknown problem") {
    const auto e = config_error(one_row("Bubeck9", "Uninform", "\"KG\""));
    CHECK(e.row() == 1);
    CHECK(e.column() == "problem");
  }
  SUBCASE("default prior without one") {
    const auto e = config_error(one_row("Bubeck1", "Default", "\"KG\""));
    CHECK(e.row() == 1);
    CHECK(e.column() == "prior");
  }
  SUBCASE("policy count mismatch") {
    const auto e = config_error(one_row("Bubeck1", "Uninform", "\"KG\", \"TS\"", "num_policies = 3\n"));
    CHECK(e.column() == "num_policies");
  }
  SUBCASE("uninformative prior with correlated beliefs") {
    std::string text = one_row("Branin", "Uninform", "\"KG\"");
    text.replace(text.find("independent"), 11, "correlated");
    CHECK(config_error(text).column() == "prior");
  }
  SUBCASE("bad budget") {
    std::string text = one_row("Bubeck1", "Uninform", "\"KG\"");
    text.replace(text.find("budget = 5"), 10, "budget = -1");
    CHECK(config_error(text).column() == "budget");
  }
  SUBCASE("unknown key") { CHECK(config_error(one_row("Bubeck1", "Uninform", "\"KG\"", "colour = 3\n")).column() == "colour"); }
  SUBCASE("no rows") { CHECK(config_error("num_p = 3\n").row() == 0); }
  SUBCASE("sheet cell") {
    const auto e = config_error("Bubeck1,Uninform,5,independent,offline,2,KG,NOPE\n", ConfigFormat::csv);
    CHECK(e.row() == 1);
    CHECK(e.column() == "8");
  }
  SUBCASE("message format") {
    const auto e = config_error(one_row("Bubeck9", "Uninform", "\"KG\""));
    CHECK(std::string(e.what()).rfind("row 1, column 'problem'", 0) == 0);
  }
}

TEST_CASE("spreadsheet format") {
  const char* sheet =
      "ProblemClass,Prior,Budget,Belief,Objective,NumPolicies,P1,P2,P3\n"
      "Bubeck1,Uninform,10,independent,offline,3,IE(1.7),UCBE(*),KG\n"
      "\"GPR(50,0.45;100)\",Default,2.5,correlated,online,2,KGCB,TS,\n"
      "\n"
      "Branin,MLE,1,independent,offline,2,EXPT,SR\n";
  const ConfigFile a = parse_config_text(sheet, ConfigFormat::csv);
  ConfigFile b = parse_config_text(kTable, ConfigFormat::toml);
  b.num_p.reset();
  b.num_truth.reset();
  b.seed.reset();
  CHECK(a == b);
}

TEST_CASE("serialization is a fixed point") {
  const ConfigFile cfg = parse_config_text(kTable, ConfigFormat::toml);
  const std::string once = serialize_config(cfg);
  const ConfigFile back = parse_config_text(once, ConfigFormat::toml);
  CHECK(back == cfg);
  CHECK(serialize_config(back) == once);
}

TEST_CASE("serialization round trips random configs") {
  const std::vector<std::string> problems{"Bubeck1", "Bubeck7", "AUF_HNoise", "EqualPrior", "Branin",
                                          "Rastrigin", "GPR(12.5,0.3;40)", "GPR(1,1;5;0.25)"};
  const std::vector<std::string> policies{"KG", "KGCB", "OLKG", "IE(*)", "IE(2.25)", "Kriging", "TS", "UCB",
                                          "UCBE(*)", "UCBE(0.001)", "UCBV", "KLUCB", "SR", "EXPL", "EXPT"};
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 1000; ++rep) {
    ConfigFile cfg;
    if (rng() % 2) cfg.num_p = 1 + rng() % 500;
    if (rng() % 2) cfg.num_truth = 1 + rng() % 50;
    if (rng() % 2) cfg.num_p_tune = 1 + rng() % 500;
    if (rng() % 2) cfg.seed = rng();
    const std::size_t rows = 1 + rng() % 4;
    for (std::size_t i = 0; i < rows; ++i) {
      ConfigRow r;
      r.problem = parse_problem_class(problems[rng() % problems.size()]);
      r.prior = rng() % 2 ? PriorMode::mle : PriorMode::uninformative;
      r.belief = r.prior == PriorMode::mle && rng() % 2 ? BeliefMode::correlated : BeliefMode::independent;
      r.objective = rng() % 2 ? Objective::online : Objective::offline;
      r.budget_ratio = std::ldexp(static_cast<double>(1 + rng() % 4000), -3);
      const std::size_t n = 1 + rng() % 5;
      for (std::size_t k = 0; k < n; ++k) r.policies.push_back(parse_policy_token(policies[rng() % policies.size()]));
      cfg.rows.push_back(std::move(r));
    }
    const std::string text = serialize_config(cfg);
    const ConfigFile back = parse_config_text(text, ConfigFormat::toml);
    CHECK(back == cfg);
    CHECK(serialize_config(back) == text);
  }
}

TEST_CASE("names") {
  CHECK(parse_prior_mode("uninformative") == PriorMode::uninformative);
  CHECK(parse_prior_mode("Given") == PriorMode::given);
  CHECK(parse_belief_mode("Correlated") == BeliefMode::correlated);
  CHECK(parse_objective("Online") == Objective::online);
  CHECK_THROWS_AS(parse_objective("sideways"), InvalidArgument);
  CHECK(parse_prior_mode(prior_mode_name(PriorMode::default_prior)) == PriorMode::default_prior);
}

TEST_CASE("split and row selector") {
  CHECK(split_top_level("a, \"b,c\" ,GPR(1,2;3)", ',') == std::vector<std::string>{"a", "b,c", "GPR(1,2;3)"});
  CHECK(parse_row_selector("1", 4) == std::vector<std::size_t>{0});
  CHECK(parse_row_selector("3,1-2,2", 4) == std::vector<std::size_t>{0, 1, 2});
  CHECK_THROWS_AS(parse_row_selector("5", 4), InvalidArgument);
  CHECK_THROWS_AS(parse_row_selector("0", 4), InvalidArgument);
  CHECK_THROWS_AS(parse_row_selector("3-2", 4), InvalidArgument);
}

TEST_CASE("given prior lookup") {
  ConfigRow r;
  r.problem = parse_problem_class("Bubeck3");
  CHECK(given_prior_path(r, "/cfg") == std::filesystem::path("/cfg/Prior/Prior_Bubeck3.csv"));
  r.prior_file = "p.csv";
  CHECK(given_prior_path(r, "/cfg") == std::filesystem::path("/cfg/p.csv"));
  CHECK(detect_format("x.CSV") == ConfigFormat::csv);
  CHECK(detect_format("x.toml") == ConfigFormat::toml);
}
