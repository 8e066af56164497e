#include "molte/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>

#include "molte/csv.hpp"
#include "text_util.hpp"

namespace molte {

ConfigError::ConfigError(std::size_t row, std::string column, const std::string& message)
    : InvalidArgument("row " + std::to_string(row) + (column.empty() ? "" : ", column '" + column + "'") + ": " +
                      message),
      row_(row),
      column_(std::move(column)),
      detail_(message) {}

bool operator==(const ConfigRow& a, const ConfigRow& b) {
  return problem_label(a.problem) == problem_label(b.problem) && a.prior == b.prior &&
         a.budget_ratio == b.budget_ratio && a.belief == b.belief && a.objective == b.objective &&
         a.policies == b.policies && a.prior_file == b.prior_file;
}

PriorMode parse_prior_mode(std::string_view text) {
  const std::string f = detail::fold_name(text);
  if (f == "uninform" || f == "uninformative" || f == "uninformed") return PriorMode::uninformative;
  if (f == "mle") return PriorMode::mle;
  if (f == "default") return PriorMode::default_prior;
  if (f == "given") return PriorMode::given;
  throw InvalidArgument("unknown prior '" + std::string(text) + "' (expected Uninform, MLE, Default or Given)");
}

std::string_view prior_mode_name(PriorMode mode) {
  switch (mode) {
    case PriorMode::uninformative: return "Uninform";
    case PriorMode::mle: return "MLE";
    case PriorMode::default_prior: return "Default";
    case PriorMode::given: return "Given";
  }
  return "?";
}

BeliefMode parse_belief_mode(std::string_view text) {
  const std::string f = detail::fold_name(text);
  if (f == "independent") return BeliefMode::independent;
  if (f == "correlated") return BeliefMode::correlated;
  throw InvalidArgument("unknown belief model '" + std::string(text) + "' (expected independent or correlated)");
}

std::string_view belief_mode_name(BeliefMode mode) {
  return mode == BeliefMode::independent ? "independent" : "correlated";
}

Objective parse_objective(std::string_view text) {
  const std::string f = detail::fold_name(text);
  if (f == "offline") return Objective::offline;
  if (f == "online") return Objective::online;
  throw InvalidArgument("unknown objective '" + std::string(text) + "' (expected Offline or Online)");
}

std::string_view objective_name(Objective objective) {
  return objective == Objective::offline ? "Offline" : "Online";
}

std::vector<std::string> split_top_level(std::string_view text, char sep) {
  std::vector<std::string> out;
  std::string current;
  int depth = 0;
  bool quoted = false;
  auto flush = [&] {
    std::string piece(detail::trim(current));
    if (piece.size() >= 2 && piece.front() == '"' && piece.back() == '"') piece = piece.substr(1, piece.size() - 2);
    out.push_back(std::move(piece));
    current.clear();
  };
  for (char c : text) {
    if (c == '"') quoted = !quoted;
    if (!quoted) {
      if (c == '(') ++depth;
      if (c == ')') depth = std::max(0, depth - 1);
      if (c == sep && depth == 0) {
        flush();
        continue;
      }
    }
    current += c;
  }
  flush();
  return out;
}

std::vector<std::size_t> parse_row_selector(std::string_view selector, std::size_t rows) {
  std::vector<std::size_t> out;
  for (const std::string& piece : detail::split_any(selector, ",")) {
    if (piece.empty()) throw InvalidArgument("empty entry in row selector '" + std::string(selector) + "'");
    long long lo = 0, hi = 0;
    if (const auto dash = piece.find('-'); dash != std::string::npos && dash > 0) {
      lo = parse_integer(detail::trim(std::string_view(piece).substr(0, dash)));
      hi = parse_integer(detail::trim(std::string_view(piece).substr(dash + 1)));
    } else {
      lo = hi = parse_integer(piece);
    }
    if (lo < 1 || hi < lo || static_cast<std::size_t>(hi) > rows) {
      throw InvalidArgument("row selector '" + piece + "' is outside 1.." + std::to_string(rows));
    }
    for (long long r = lo; r <= hi; ++r) out.push_back(static_cast<std::size_t>(r - 1));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::filesystem::path given_prior_path(const ConfigRow& row, const std::filesystem::path& base_dir) {
  if (!row.prior_file.empty()) return row.prior_file.is_absolute() ? row.prior_file : base_dir / row.prior_file;
  const std::string name = row.problem.name == "File" ? row.problem.truth_file.stem().string() : row.problem.name;
  return base_dir / "Prior" / ("Prior_" + name + ".csv");
}

ConfigFormat detect_format(const std::filesystem::path& path) {
  return detail::ends_with_ci(path.string(), ".csv") ? ConfigFormat::csv : ConfigFormat::toml;
}

namespace {

// Wraps a field parser so its InvalidArgument carries the location.
template <class F>
auto located(std::size_t row, const std::string& column, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const InvalidArgument& e) {
    throw ConfigError(row, column, e.what());
  }
}

double parse_budget(std::string_view text) {
  const double v = parse_double(detail::trim(text));
  if (!(v > 0.0) || !std::isfinite(v)) throw InvalidArgument("measurement budget must be a positive number");
  return v;
}

std::size_t parse_count(std::string_view text, std::size_t min) {
  const long long v = parse_integer(detail::trim(text));
  if (v < static_cast<long long>(min)) {
    throw InvalidArgument("expected an integer >= " + std::to_string(min) + ", got '" + std::string(text) + "'");
  }
  return static_cast<std::size_t>(v);
}

// Row-level checks that need several fields at once.
void check_row(const ConfigRow& r, std::size_t row) {
  if (r.policies.empty()) throw ConfigError(row, "policies", "at least one policy is required");
  if (r.prior == PriorMode::default_prior && !has_default_prior(r.problem)) {
    throw ConfigError(row, "prior",
                      "Default prior requested but problem " + problem_label(r.problem) + " has no default prior");
  }
  if (r.prior == PriorMode::uninformative && r.belief == BeliefMode::correlated) {
    throw ConfigError(row, "prior", "an uninformative prior cannot be used with correlated beliefs");
  }
}

// ---- table format -------------------------------------------------------

struct Value {
  bool is_array = false;
  std::string scalar;
  std::vector<std::string> items;
};

std::string unquote(std::string_view raw, std::size_t line) {
  std::string_view v = detail::trim(raw);
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') {
    std::string out;
    for (std::size_t i = 1; i + 1 < v.size(); ++i) {
      if (v[i] == '\\' && i + 2 < v.size()) {
        out += v[++i];
      } else if (v[i] == '"') {
        throw ConfigError(line, "", "unescaped quote inside string");
      } else {
        out += v[i];
      }
    }
    return out;
  }
  if (!v.empty() && v.front() == '"') throw ConfigError(line, "", "unterminated string");
  return std::string(v);
}

std::string strip_comment(std::string_view line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) quoted = !quoted;
    if (line[i] == '#' && !quoted) return std::string(line.substr(0, i));
  }
  return std::string(line);
}

Value parse_value(std::string_view raw, std::size_t line) {
  std::string_view v = detail::trim(raw);
  Value out;
  if (!v.empty() && v.front() == '[') {
    if (v.back() != ']') throw ConfigError(line, "", "array must close on the same line");
    out.is_array = true;
    const std::string_view inner = detail::trim(v.substr(1, v.size() - 2));
    if (inner.empty()) return out;
    for (const std::string& piece : split_top_level(inner, ',')) {
      if (piece.empty()) throw ConfigError(line, "", "empty array element");
      out.items.push_back(piece);
    }
    return out;
  }
  out.scalar = unquote(v, line);
  return out;
}

void apply_row_key(ConfigRow& r, bool& seen_problem, std::optional<std::size_t>& declared_count,
                   const std::string& key, const Value& value, std::size_t row, std::size_t line) {
  auto scalar = [&] {
    if (value.is_array) throw ConfigError(row, key, "expected a single value, not an array (line " + std::to_string(line) + ")");
    return value.scalar;
  };
  const std::string k = detail::fold_name(key);
  if (k == "problem" || k == "problemclass") {
    r.problem = located(row, "problem", [&] { return parse_problem_class(scalar()); });
    seen_problem = true;
  } else if (k == "prior") {
    r.prior = located(row, "prior", [&] { return parse_prior_mode(scalar()); });
  } else if (k == "priorfile") {
    r.prior_file = scalar();
  } else if (k == "budget" || k == "measurementbudget") {
    r.budget_ratio = located(row, "budget", [&] { return parse_budget(scalar()); });
  } else if (k == "belief" || k == "beliefmodel") {
    r.belief = located(row, "belief", [&] { return parse_belief_mode(scalar()); });
  } else if (k == "objective" || k == "offline/online") {
    r.objective = located(row, "objective", [&] { return parse_objective(scalar()); });
  } else if (k == "numpolicies" || k == "numberofpolicies") {
    declared_count = located(row, "num_policies", [&] { return parse_count(scalar(), 1); });
  } else if (k == "policies") {
    if (!value.is_array) throw ConfigError(row, "policies", "expected an array such as [\"KG\", \"IE(*)\"]");
    r.policies.clear();
    for (const std::string& item : value.items) {
      r.policies.push_back(located(row, "policies", [&] { return parse_policy_token(item); }));
    }
  } else {
    throw ConfigError(row, key, "unknown key");
  }
}

ConfigFile parse_table(std::string_view text) {
  ConfigFile cfg;
  std::size_t line_no = 0;
  bool in_row = false;
  bool seen_problem = false;
  std::optional<std::size_t> declared;
  ConfigRow current;

  auto finish_row = [&] {
    if (!in_row) return;
    const std::size_t row = cfg.rows.size() + 1;
    if (!seen_problem) throw ConfigError(row, "problem", "missing problem");
    if (declared && *declared != current.policies.size()) {
      throw ConfigError(row, "num_policies",
                        "declares " + std::to_string(*declared) + " policies but lists " +
                            std::to_string(current.policies.size()));
    }
    check_row(current, row);
    cfg.rows.push_back(std::move(current));
    current = ConfigRow{};
    seen_problem = false;
    declared.reset();
  };

  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find('\n', start), text.size());
    ++line_no;
    const std::string line = strip_comment(text.substr(start, end - start));
    start = end + 1;
    const std::string_view t = detail::trim(line);
    if (t.empty()) {
      if (end == text.size()) break;
      continue;
    }
    if (t == "[[row]]") {
      finish_row();
      in_row = true;
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string_view::npos) throw ConfigError(cfg.rows.size() + in_row, "", "expected key = value on line " + std::to_string(line_no));
    const std::string key(detail::trim(t.substr(0, eq)));
    const Value value = parse_value(t.substr(eq + 1), line_no);
    if (in_row) {
      apply_row_key(current, seen_problem, declared, key, value, cfg.rows.size() + 1, line_no);
      continue;
    }
    const std::string k = detail::fold_name(key);
    auto count = [&](std::size_t min) {
      return located(0, key, [&] { return parse_count(value.scalar, min); });
    };
    if (k == "nump") {
      cfg.num_p = count(1);
    } else if (k == "numtruth") {
      cfg.num_truth = count(1);
    } else if (k == "numptune") {
      cfg.num_p_tune = count(1);
    } else if (k == "seed") {
      cfg.seed = located(0, key, [&] {
        const std::string_view t = detail::trim(value.scalar);
        std::uint64_t v = 0;
        const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
        if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
          throw InvalidArgument("seed must be an integer in [0, 2^64), got '" + std::string(t) + "'");
        }
        return v;
      });
    } else {
      throw ConfigError(0, key, "unknown top-level key (rows start with [[row]])");
    }
    if (end == text.size()) break;
  }
  finish_row();
  if (cfg.rows.empty()) throw ConfigError(0, "", "no [[row]] entries");
  return cfg;
}

// ---- spreadsheet CSV ------------------------------------------------------

ConfigFile parse_sheet(std::string_view text) {
  ConfigFile cfg;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (detail::trim(line).empty() || detail::trim(line).front() == '#') continue;
    const std::vector<std::string> cells = split_top_level(line, ',');
    if (detail::fold_name(cells.front()) == "problemclass") continue;  // header
    if (cells.size() < 6) throw ConfigError(line_no, "", "expected at least 6 columns");
    ConfigRow r;
    r.problem = located(line_no, "1", [&] { return parse_problem_class(cells[0]); });
    r.prior = located(line_no, "2", [&] { return parse_prior_mode(cells[1]); });
    r.budget_ratio = located(line_no, "3", [&] { return parse_budget(cells[2]); });
    r.belief = located(line_no, "4", [&] { return parse_belief_mode(cells[3]); });
    r.objective = located(line_no, "5", [&] { return parse_objective(cells[4]); });
    const std::size_t declared = located(line_no, "6", [&] { return parse_count(cells[5], 1); });
    for (std::size_t c = 6; c < cells.size(); ++c) {
      if (cells[c].empty()) continue;
      r.policies.push_back(located(line_no, std::to_string(c + 1), [&] { return parse_policy_token(cells[c]); }));
    }
    if (declared != r.policies.size()) {
      throw ConfigError(line_no, "6",
                        "declares " + std::to_string(declared) + " policies but lists " +
                            std::to_string(r.policies.size()));
    }
    check_row(r, line_no);
    cfg.rows.push_back(std::move(r));
  }
  if (cfg.rows.empty()) throw ConfigError(0, "", "no rows");
  return cfg;
}

std::string quote_str(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

}  // namespace

ConfigFile parse_config_text(std::string_view text, ConfigFormat format) {
  return format == ConfigFormat::csv ? parse_sheet(text) : parse_table(text);
}

ConfigFile parse_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const Error& e) {
    throw ConfigError(0, "", std::string("cannot read config: ") + e.what());
  }
  return parse_config_text(text, detect_format(path));
}

std::string serialize_config(const ConfigFile& config) {
  std::string out;
  if (config.num_p) out += "num_p = " + std::to_string(*config.num_p) + "\n";
  if (config.num_truth) out += "num_truth = " + std::to_string(*config.num_truth) + "\n";
  if (config.num_p_tune) out += "num_p_tune = " + std::to_string(*config.num_p_tune) + "\n";
  if (config.seed) out += "seed = " + std::to_string(*config.seed) + "\n";
  for (const ConfigRow& r : config.rows) {
    if (!out.empty()) out += "\n";
    out += "[[row]]\n";
    out += "problem = " + quote_str(problem_label(r.problem)) + "\n";
    out += "prior = " + quote_str(prior_mode_name(r.prior)) + "\n";
    if (!r.prior_file.empty()) out += "prior_file = " + quote_str(r.prior_file.string()) + "\n";
    out += "budget = " + format_double(r.budget_ratio) + "\n";
    out += "belief = " + quote_str(belief_mode_name(r.belief)) + "\n";
    out += "objective = " + quote_str(objective_name(r.objective)) + "\n";
    out += "policies = [";
    for (std::size_t k = 0; k < r.policies.size(); ++k) {
      if (k) out += ", ";
      out += quote_str(policy_token(r.policies[k]));
    }
    out += "]\n";
  }
  return out;
}

}  // namespace molte
