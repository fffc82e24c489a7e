#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace kpad::csv {

/// Shortest decimal text that parses back to exactly `value`.
std::string format_number(double value);
double parse_number(std::string_view text);

std::vector<std::string> split_line(std::string_view line);

struct Table {
  std::vector<std::string> comments;  // leading `#` lines, without the marker
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Throws InvalidArgument if the column is missing.
  std::size_t column(std::string_view name) const;
};

/// Reads a comma-separated file. Lines starting with '#' before the header are
/// collected as comments; blank lines are skipped. Fields may not contain commas.
Table read(const std::filesystem::path& path);
Table parse(std::string_view text);

std::string join(const std::vector<std::string>& fields);

/// Writes `text` to `path`, creating parent directories. Throws IoError.
void write_text(const std::filesystem::path& path, std::string_view text);
std::string read_text(const std::filesystem::path& path);

}  // namespace kpad::csv
