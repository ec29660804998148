#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace csm::csv {

/// Shortest decimal text that parses back to exactly `v`.
std::string format(double v);

/// Header plus rows of fields; blank lines and lines starting with '#' skipped.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column index by name; throws csm::ConfigError naming `path` if absent.
  std::size_t column(std::string_view name, const std::string& path) const;
};

Table read(const std::string& path);
double parse_double(const std::string& field, const std::string& path, std::size_t line);

/// Writes `text` to `path`, throwing csm::IoError with the path on failure.
void write_file(const std::string& path, const std::string& text);

}  // namespace csm::csv
