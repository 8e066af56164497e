#include "molte/cli.hpp"

#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>
#include <json.hpp>
#include <map>
#include <mutex>
#include <set>

#include "molte/config.hpp"
#include "molte/csv.hpp"
#include "molte/harness.hpp"
#include "molte/log.hpp"
#include "molte/metrics.hpp"
#include "molte/report.hpp"

namespace molte {
namespace {

using json = nlohmann::ordered_json;

struct Options {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::size_t workers = 1;
  std::optional<std::size_t> num_p, num_truth, num_p_tune;
  std::string rows;
  bool emit_svg = false;
  bool record_decisions = false;
  bool verbose = false;
};

struct PlannedRow {
  std::size_t index = 0;  // zero-based position in the config file
  ExperimentConfig config;
  std::string folder;
};

void print_error(const std::string& kind, const std::string& message, const ConfigError* where = nullptr) {
  json line{{"error", kind}, {"message", message}};
  if (where) {
    line["row"] = where->row();
    if (!where->column().empty()) line["column"] = where->column();
    line["message"] = where->detail();
  }
  std::cerr << line.dump() << '\n';
}

// Relative truth files and prior files are resolved against the config's
// directory, so a config can be run from anywhere.
std::filesystem::path resolve_against(const std::filesystem::path& p, const std::filesystem::path& base) {
  return p.is_absolute() ? p : base / p;
}

std::vector<PlannedRow> plan(const ConfigFile& file, const Options& opt, const std::filesystem::path& base) {
  const std::vector<std::size_t> selected =
      opt.rows.empty() ? [&] {
        std::vector<std::size_t> all(file.rows.size());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
        return all;
      }()
                       : parse_row_selector(opt.rows, file.rows.size());

  std::vector<PlannedRow> out;
  std::map<std::string, std::size_t> used;
  for (std::size_t i : selected) {
    const ConfigRow& row = file.rows[i];
    const std::size_t row_no = i + 1;
    PlannedRow p;
    p.index = i;
    ExperimentConfig& c = p.config;
    c.problem = row.problem;
    if (c.problem.name == "File") {
      c.problem.truth_file = resolve_against(c.problem.truth_file, base);
      try {
        (void)load_truth_csv(c.problem.truth_file);
      } catch (const Error& e) {
        throw ConfigError(row_no, "problem", e.what());
      }
    }
    c.prior_mode = row.prior;
    c.budget_ratio = row.budget_ratio;
    c.belief_mode = row.belief;
    c.objective = row.objective;
    c.policies = row.policies;
    c.num_p = opt.num_p.value_or(file.num_p.value_or(100));
    c.num_truth = opt.num_truth.value_or(file.num_truth.value_or(10));
    c.num_p_tune = opt.num_p_tune.value_or(file.num_p_tune.value_or(100));
    c.master_seed = opt.seed.value_or(file.seed.value_or(0));
    c.record_decisions = opt.record_decisions;
    if (row.prior == PriorMode::given) {
      const std::filesystem::path prior_path = given_prior_path(row, base);
      if (std::filesystem::exists(prior_path)) {
        try {
          c.given_prior = read_prior_csv(prior_path);
        } catch (const Error& e) {
          throw ConfigError(row_no, "prior", e.what());
        }
      } else if (!has_default_prior(row.problem)) {
        throw ConfigError(row_no, "prior", "Given prior file " + prior_path.string() + " not found");
      }
    }
    try {
      validate_config(c);
      // Instantiate one episode so arity mismatches between a given prior and
      // the problem surface before any output is written.
      if (c.given_prior) (void)make_episode_setup(c, truth_seed(c.master_seed, 0, 0));
    } catch (const ConfigError&) {
      throw;
    } catch (const InvalidArgument& e) {
      throw ConfigError(row_no, "", e.what());
    }
    const std::string base_name = folder_name(problem_label(row.problem));
    const std::size_t n = ++used[base_name];
    p.folder = n == 1 ? base_name : base_name + "_" + std::to_string(n);
    out.push_back(std::move(p));
  }
  return out;
}

json grid_json(const TuningGrid& g) {
  return {{"lo", g.lo}, {"hi", g.hi}, {"points", g.points}, {"refine_points", g.refine_points}};
}

class Manifest {
 public:
  Manifest(std::filesystem::path path, const ConfigFile& file, const std::vector<PlannedRow>& rows)
      : path_(std::move(path)) {
    const ExperimentConfig& first = rows.front().config;
    doc_["schema_version"] = kSchemaVersion;
    doc_["version"] = MOLTE_VERSION;
    doc_["status"] = "running";
    doc_["master_seed"] = first.master_seed;
    doc_["num_p"] = first.num_p;
    doc_["num_truth"] = first.num_truth;
    doc_["num_p_tune"] = first.num_p_tune;
    doc_["tuning_grid"] = grid_json(first.grid);
    doc_["ties"] = {{"argmax", "lowest index"},
                    {"prob_winning", "exact ties split the winning mass equally"},
                    {"tuning", "smallest parameter among equal objectives"}};
    doc_["config"] = serialize_config(file);
    json list = json::array();
    for (const PlannedRow& r : rows) {
      list.push_back({{"row", r.index + 1},
                      {"problem", problem_label(r.config.problem)},
                      {"folder", r.folder},
                      {"policies", policy_tokens(r.config)},
                      {"status", "pending"}});
    }
    doc_["rows"] = std::move(list);
    write();
  }

  void row_done(std::size_t position, const ExperimentConfig& config, std::span<const double> params,
                const std::vector<std::optional<TuningResult>>& tuning) {
    json& r = doc_["rows"][position];
    json p = json::array();
    for (std::size_t k = 0; k < params.size(); ++k) {
      json entry{{"policy", policy_token(config.policies[k])}, {"parameter", params[k]}};
      if (tuning[k]) entry["tuning_flat"] = tuning[k]->flat;
      p.push_back(std::move(entry));
    }
    r["parameters"] = std::move(p);
    r["status"] = "complete";
    write();
  }

  void finish(const std::string& status, const std::string& error = {}) {
    doc_["status"] = status;
    if (!error.empty()) doc_["error"] = error;
    write();
  }

 private:
  void write() { write_text_atomic(path_, doc_.dump(2) + "\n"); }

  std::filesystem::path path_;
  json doc_;
};

void run_row(const PlannedRow& row, std::size_t position, const std::filesystem::path& out_dir,
             const Options& opt, Manifest& manifest) {
  const ExperimentConfig& c = row.config;
  const std::filesystem::path dir = out_dir / row.folder;
  const std::string label = problem_label(c.problem);
  std::vector<std::optional<TuningResult>> tuning;
  const std::vector<double> params = resolve_parameters(c, opt.workers, &tuning);
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (tuning[k]) log_info(label + ": " + policy_token(c.policies[k]) + " tuned to " + format_double(params[k]));
  }

  std::size_t done = 0;
  RunOptions ro;
  ro.workers = opt.workers;
  ro.on_trial_done = [&](const TrialResult& t) {
    write_trial_outputs(dir, c, t);
    ++done;
    std::cerr << "[" << label << "] trial " << (t.trial_index + 1) << " done (" << done << "/" << c.num_p << ")\n";
  };
  const std::vector<TrialResult> trials = run_experiment(c, params, ro);

  const std::vector<EpisodeRecord> records = episode_records(trials);
  std::vector<bool> tuned;
  for (const PolicySpec& p : c.policies) tuned.push_back(p.directive.kind == ParamKind::tune);
  const ComparisonReport report = compare(records, policy_tokens(c), params, tuned, c.num_p, c.num_truth);
  write_problem_summary(dir, c, report, &trials.front(), opt.emit_svg);
  manifest.row_done(position, c, params, tuning);
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Simulation-based comparison of sequential learning policies", "molte"};
  Options opt;
  std::uint64_t seed = 0;
  std::size_t num_p = 0, num_truth = 0, num_p_tune = 0;
  app.add_option("--config", opt.config, "Experiment matrix (.toml-like table or spreadsheet .csv)");
  app.add_option("--out", opt.out, "Output directory (default: $MOLTE_OUT, else ./molte_out)");
  auto* seed_opt = app.add_option("--seed", seed, "Master seed");
  app.add_option("--workers", opt.workers, "Worker threads; 0 uses every core")->capture_default_str();
  auto* np_opt = app.add_option("--num-p", num_p, "Trials per row")->check(CLI::PositiveNumber);
  auto* nt_opt = app.add_option("--num-truth", num_truth, "Truths per trial")->check(CLI::PositiveNumber);
  auto* npt_opt = app.add_option("--tune-num-p", num_p_tune, "Episodes per tuning evaluation")->check(CLI::PositiveNumber);
  app.add_option("--row", opt.rows, "Rows to run, e.g. 1 or 1,3-4 (1-based)");
  app.add_option("--emit-svg", opt.emit_svg, "Also write SVG charts (true/false)");
  app.add_flag("--record-decisions", opt.record_decisions, "Write decisions.csv for the first trial");
  app.add_flag("--verbose,-v", opt.verbose, "Log informational messages");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("usage", e.what());
    return kExitConfig;
  }
  if (*seed_opt) opt.seed = seed;
  if (*np_opt) opt.num_p = num_p;
  if (*nt_opt) opt.num_truth = num_truth;
  if (*npt_opt) opt.num_p_tune = num_p_tune;
  opt.workers = resolve_workers(opt.workers);

  static std::mutex sink_mutex;
  const bool verbose = opt.verbose;
  set_log_sink([verbose](LogLevel level, std::string_view message) {
    if (level == LogLevel::info && !verbose) return;
    std::lock_guard lock(sink_mutex);
    std::cerr << (level == LogLevel::warning ? "warning: " : "") << message << '\n';
  });

  if (opt.config.empty()) {
    print_error("config", "--config is required");
    return kExitConfig;
  }
  std::filesystem::path out_dir = opt.out;
  if (out_dir.empty()) {
    const char* env = std::getenv("MOLTE_OUT");
    out_dir = env && *env ? env : "molte_out";
  }

  ConfigFile file;
  std::vector<PlannedRow> rows;
  try {
    const std::filesystem::path config_path(opt.config);
    if (!std::filesystem::is_regular_file(config_path)) {
      throw ConfigError(0, "", "config file " + config_path.string() + " does not exist");
    }
    file = parse_config(config_path);
    rows = plan(file, opt, config_path.parent_path());
  } catch (const ConfigError& e) {
    print_error("config", e.what(), &e);
    return kExitConfig;
  } catch (const Error& e) {
    print_error("config", e.what());
    return kExitConfig;
  }

  std::unique_ptr<Manifest> manifest;
  try {
    std::filesystem::create_directories(out_dir);
    manifest = std::make_unique<Manifest>(out_dir / "manifest.json", file, rows);
  } catch (const std::exception& e) {
    print_error("io", e.what());
    return kExitRuntime;
  }

  try {
    for (std::size_t i = 0; i < rows.size(); ++i) run_row(rows[i], i, out_dir, opt, *manifest);
    manifest->finish("complete");
  } catch (const std::exception& e) {
    print_error("runtime", e.what());
    try {
      manifest->finish("partial", e.what());
    } catch (const std::exception&) {
    }
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace molte
