#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "molte/harness.hpp"
#include "molte/metrics.hpp"

namespace molte {

inline constexpr int kSchemaVersion = 1;

/// File-system safe folder name for a problem label.
std::string folder_name(std::string_view label);

/// Writes via a temporary sibling and rename, so readers never see a
/// half-written file.
void write_text_atomic(const std::filesystem::path& path, std::string_view content);

/// Policy tokens as they appear in CSV files: the config token, with `(*)`
/// kept for tuned policies.
std::vector<std::string> policy_tokens(const ExperimentConfig& config);

/// Files of one trial folder (`<problem_dir>/<trial + 1>/`):
/// objective_function.csv always; choices.csv, final_fit.csv and
/// decisions.csv (when recorded) for the first trial; alpha.txt when any
/// policy was tuned.
void write_trial_outputs(const std::filesystem::path& problem_dir, const ExperimentConfig& config,
                         const TrialResult& trial);

std::string objective_function_csv(const ExperimentConfig& config, const TrialResult& trial);
std::string choices_csv(const ExperimentConfig& config, const TrialResult& trial);
std::string final_fit_csv(const ExperimentConfig& config, const TrialResult& trial);
std::string decisions_csv(const ExperimentConfig& config, const TrialResult& trial);
std::string alpha_txt(const ExperimentConfig& config, std::span<const double> parameters);

std::string summary_csv(const ComparisonReport& report);
std::string histogram_csv(const ComparisonReport& report);

/// summary.csv, offline_hist.csv or online_hist.csv, and optionally SVG
/// renderings of the histogram, win probabilities and first-trial sampling
/// patterns.
void write_problem_summary(const std::filesystem::path& problem_dir, const ExperimentConfig& config,
                           const ComparisonReport& report, const TrialResult* first_trial, bool emit_svg);

// Minimal static SVG charts.
std::string svg_bar_chart(std::string_view title, std::span<const std::string> labels, std::span<const double> values);
std::string svg_histogram(std::string_view title, std::span<const double> edges,
                          std::span<const std::string> series_labels,
                          const std::vector<std::vector<std::size_t>>& counts);

}  // namespace molte
