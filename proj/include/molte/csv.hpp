#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace molte {

using CsvRow = std::vector<std::string>;
using CsvTable = std::vector<CsvRow>;

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

/// Strict full-field parse; throws InvalidArgument on trailing garbage.
double parse_double(std::string_view text);
long long parse_integer(std::string_view text);

/// RFC-4180 field: quoted only when it contains a comma, quote or newline.
std::string csv_field(std::string_view text);
std::string csv_line(const CsvRow& fields);

CsvTable parse_csv(std::string_view text);
CsvTable read_csv(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace molte
