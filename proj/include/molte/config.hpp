#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "molte/error.hpp"
#include "molte/harness.hpp"

namespace molte {

/// Invalid configuration, located by row (1-based) and column.
class ConfigError : public InvalidArgument {
 public:
  ConfigError(std::size_t row, std::string column, const std::string& message);

  std::size_t row() const noexcept { return row_; }
  const std::string& column() const noexcept { return column_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::size_t row_;
  std::string column_;
  std::string detail_;
};

/// One comparison row of the experiment matrix, fully resolved.
struct ConfigRow {
  ProblemClassSpec problem;
  PriorMode prior = PriorMode::uninformative;
  double budget_ratio = 5.0;
  BeliefMode belief = BeliefMode::independent;
  Objective objective = Objective::offline;
  std::vector<PolicySpec> policies;
  std::filesystem::path prior_file;  ///< explicit given-prior CSV, if any

  friend bool operator==(const ConfigRow& a, const ConfigRow& b);
};

struct ConfigFile {
  std::vector<ConfigRow> rows;
  std::optional<std::size_t> num_p;
  std::optional<std::size_t> num_truth;
  std::optional<std::size_t> num_p_tune;
  std::optional<std::uint64_t> seed;

  friend bool operator==(const ConfigFile&, const ConfigFile&) = default;
};

enum class ConfigFormat { toml, csv };

/// `.csv` files use the spreadsheet layout; anything else the table format.
ConfigFormat detect_format(const std::filesystem::path& path);

ConfigFile parse_config_text(std::string_view text, ConfigFormat format);
ConfigFile parse_config(const std::filesystem::path& path);

/// Table-format text that parses back to an equal ConfigFile.
std::string serialize_config(const ConfigFile& config);

PriorMode parse_prior_mode(std::string_view text);
std::string_view prior_mode_name(PriorMode mode);
BeliefMode parse_belief_mode(std::string_view text);
std::string_view belief_mode_name(BeliefMode mode);
Objective parse_objective(std::string_view text);
std::string_view objective_name(Objective objective);

/// Splits on `sep` outside parentheses and double quotes, trimming pieces
/// and stripping one level of surrounding quotes.
std::vector<std::string> split_top_level(std::string_view text, char sep);

/// 1-based row selector: "3", "1,3", "2-4", or a mix. Returns sorted,
/// de-duplicated zero-based indices, each below `rows`.
std::vector<std::size_t> parse_row_selector(std::string_view selector, std::size_t rows);

/// Where a given prior for `row` is looked up: the explicit prior_file,
/// else `<base_dir>/Prior/Prior_<problem name>.csv`.
std::filesystem::path given_prior_path(const ConfigRow& row, const std::filesystem::path& base_dir);

}  // namespace molte
