#include "molte/report.hpp"

#include <algorithm>
#include <fstream>

#include "molte/csv.hpp"
#include "molte/error.hpp"

namespace molte {

std::string folder_name(std::string_view label) {
  std::string out;
  for (char c : label) {
    const bool keep = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-' ||
                      c == '_' || c == '.';
    out += keep ? c : '_';
  }
  while (!out.empty() && out.back() == '_') out.pop_back();
  if (out.empty() || out == "." || out == "..") out = "problem";
  return out;
}

void write_text_atomic(const std::filesystem::path& path, std::string_view content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move " + tmp.string() + " into place: " + ec.message());
}

std::vector<std::string> policy_tokens(const ExperimentConfig& config) {
  std::vector<std::string> out;
  for (const PolicySpec& p : config.policies) out.push_back(policy_token(p));
  return out;
}

namespace {

std::string index1(std::size_t i) { return std::to_string(i + 1); }

}  // namespace

std::string objective_function_csv(const ExperimentConfig& config, const TrialResult& trial) {
  const auto tokens = policy_tokens(config);
  std::string out = csv_line({"policy_index", "policy", "truth", "objective", "oc", "recommendation", "optimal",
                              "mu_max", "mu_min", "budget"});
  for (std::size_t k = 0; k < trial.episodes.size(); ++k) {
    for (std::size_t u = 0; u < trial.truths.size(); ++u) {
      const EpisodeResult& e = trial.episodes[k][u];
      const TruthRecord& t = trial.truths[u];
      const bool optimal = t.mu(static_cast<Eigen::Index>(e.recommendation)) == t.mu_max;
      out += csv_line({index1(k), tokens[k], index1(u), format_double(e.objective), format_double(e.oc),
                       index1(e.recommendation), optimal ? "1" : "0", format_double(t.mu_max),
                       format_double(t.mu_min), std::to_string(t.budget)});
    }
  }
  return out;
}

std::string choices_csv(const ExperimentConfig& config, const TrialResult& trial) {
  const auto tokens = policy_tokens(config);
  std::string out = csv_line({"policy_index", "policy", "truth", "arm", "count"});
  for (std::size_t k = 0; k < trial.episodes.size(); ++k) {
    for (std::size_t u = 0; u < trial.truths.size(); ++u) {
      const EpisodeResult& e = trial.episodes[k][u];
      for (std::size_t x = 0; x < e.counts.size(); ++x) {
        out += csv_line({index1(k), tokens[k], index1(u), index1(x), std::to_string(e.counts[x])});
      }
    }
  }
  return out;
}

std::string final_fit_csv(const ExperimentConfig& config, const TrialResult& trial) {
  const auto tokens = policy_tokens(config);
  std::string out = csv_line({"policy_index", "policy", "truth", "arm", "theta_final", "mu"});
  for (std::size_t k = 0; k < trial.episodes.size(); ++k) {
    for (std::size_t u = 0; u < trial.truths.size(); ++u) {
      const EpisodeResult& e = trial.episodes[k][u];
      for (Eigen::Index x = 0; x < e.final_estimates.size(); ++x) {
        out += csv_line({index1(k), tokens[k], index1(u), index1(static_cast<std::size_t>(x)),
                         format_double(e.final_estimates(x)), format_double(trial.truths[u].mu(x))});
      }
    }
  }
  return out;
}

std::string decisions_csv(const ExperimentConfig& config, const TrialResult& trial) {
  const auto tokens = policy_tokens(config);
  std::string out = csv_line({"policy_index", "policy", "truth", "step", "arm"});
  for (std::size_t k = 0; k < trial.episodes.size(); ++k) {
    for (std::size_t u = 0; u < trial.truths.size(); ++u) {
      const auto& d = trial.episodes[k][u].decisions;
      for (std::size_t n = 0; n < d.size(); ++n) {
        out += csv_line({index1(k), tokens[k], index1(u), index1(n), index1(d[n])});
      }
    }
  }
  return out;
}

std::string alpha_txt(const ExperimentConfig& config, std::span<const double> parameters) {
  const auto tokens = policy_tokens(config);
  std::string out = csv_line({"policy_index", "policy", "value"});
  for (std::size_t k = 0; k < config.policies.size(); ++k) {
    if (config.policies[k].directive.kind != ParamKind::tune) continue;
    out += csv_line({index1(k), tokens[k], format_double(parameters[k])});
  }
  return out;
}

void write_trial_outputs(const std::filesystem::path& problem_dir, const ExperimentConfig& config,
                         const TrialResult& trial) {
  const std::filesystem::path dir = problem_dir / std::to_string(trial.trial_index + 1);
  std::filesystem::create_directories(dir);
  write_text_atomic(dir / "objective_function.csv", objective_function_csv(config, trial));
  if (trial.trial_index == 0) {
    write_text_atomic(dir / "choices.csv", choices_csv(config, trial));
    write_text_atomic(dir / "final_fit.csv", final_fit_csv(config, trial));
    if (config.record_decisions) write_text_atomic(dir / "decisions.csv", decisions_csv(config, trial));
  }
  const bool tuned = std::any_of(config.policies.begin(), config.policies.end(),
                                 [](const PolicySpec& p) { return p.directive.kind == ParamKind::tune; });
  if (tuned) write_text_atomic(dir / "alpha.txt", alpha_txt(config, trial.parameters));
}

std::string summary_csv(const ComparisonReport& report) {
  std::string out = csv_line({"policy_index", "policy", "parameter", "tuned", "mean_objective", "mean_oc", "sd_oc",
                              "prob_optimal", "prob_winning", "prob_outperform", "mean_normalized_oc",
                              "sd_normalized_oc"});
  for (std::size_t k = 0; k < report.policies.size(); ++k) {
    const PolicySummary& s = report.policies[k];
    out += csv_line({index1(k), s.token, format_double(s.parameter), s.tuned ? "1" : "0",
                     format_double(s.mean_objective), format_double(s.mean_oc), format_double(s.sd_oc),
                     format_double(s.prob_optimal), format_double(s.prob_winning), format_double(s.prob_outperform),
                     format_double(s.mean_normalized_oc), format_double(s.sd_normalized_oc)});
  }
  return out;
}

std::string histogram_csv(const ComparisonReport& report) {
  std::string out = csv_line({"kind", "policy_index", "policy", "index", "bin_lo", "bin_hi", "value"});
  for (std::size_t k = 0; k < report.policies.size(); ++k) {
    const auto& series = report.normalized_series[k];
    for (std::size_t t = 0; t < series.size(); ++t) {
      out += csv_line({"series", index1(k), report.policies[k].token, index1(t), "", "", format_double(series[t])});
    }
  }
  const Histogram& h = report.histogram;
  for (std::size_t s = 0; s < h.counts.size(); ++s) {
    const std::size_t k = s + 1;  // histogram skips the reference policy
    for (std::size_t b = 0; b < h.counts[s].size(); ++b) {
      out += csv_line({"bin", index1(k), report.policies[k].token, index1(b), format_double(h.edges[b]),
                       format_double(h.edges[b + 1]), std::to_string(h.counts[s][b])});
    }
  }
  return out;
}

void write_problem_summary(const std::filesystem::path& problem_dir, const ExperimentConfig& config,
                           const ComparisonReport& report, const TrialResult* first_trial, bool emit_svg) {
  std::filesystem::create_directories(problem_dir);
  write_text_atomic(problem_dir / "summary.csv", summary_csv(report));
  const std::string hist_name = config.objective == Objective::offline ? "offline_hist" : "online_hist";
  write_text_atomic(problem_dir / (hist_name + ".csv"), histogram_csv(report));
  if (!emit_svg) return;

  std::vector<std::string> labels;
  std::vector<double> winning;
  for (const PolicySummary& s : report.policies) {
    labels.push_back(s.token);
    winning.push_back(s.prob_winning);
  }
  write_text_atomic(problem_dir / "prob_winning.svg", svg_bar_chart("Probability of winning", labels, winning));
  if (!report.histogram.counts.empty()) {
    std::vector<std::string> others(labels.begin() + 1, labels.end());
    write_text_atomic(problem_dir / (hist_name + ".svg"),
                      svg_histogram("Normalized OC vs " + labels.front(), report.histogram.edges, others,
                                    report.histogram.counts));
  }
  if (first_trial) {
    for (std::size_t k = 0; k < labels.size(); ++k) {
      const std::vector<std::size_t> counts = sampling_pattern(*first_trial, k, first_trial->truths.size());
      std::vector<std::string> arms;
      std::vector<double> values;
      for (std::size_t x = 0; x < counts.size(); ++x) {
        arms.push_back(std::to_string(x + 1));
        values.push_back(static_cast<double>(counts[x]));
      }
      write_text_atomic(problem_dir / ("sampling_" + std::to_string(k + 1) + ".svg"),
                        svg_bar_chart("Sampling pattern: " + labels[k], arms, values));
    }
  }
}

}  // namespace molte
