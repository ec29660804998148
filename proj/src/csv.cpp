#include "csm/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "csm/error.hpp"

namespace csm::csv {

std::string format(double v) {
  if (std::isnan(v)) {
    return "nan";
  }
  if (std::isinf(v)) {
    return v > 0 ? "inf" : "-inf";
  }
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) {
    while (!field.empty() && (field.back() == '\r' || field.back() == ' ')) {
      field.pop_back();
    }
    out.push_back(field);
  }
  if (!line.empty() && line.back() == ',') {
    out.emplace_back();
  }
  return out;
}

}  // namespace

std::size_t Table::column(std::string_view name, const std::string& path) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) {
      return i;
    }
  }
  throw ConfigError(path + ": missing column '" + std::string(name) + "'");
}

Table read(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open '" + path + "'");
  }
  Table t;
  std::string line;
  bool have_header = false;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r" || line.front() == '#') {
      continue;
    }
    auto fields = split(line);
    if (!have_header) {
      t.header = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != t.header.size()) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected " +
                        std::to_string(t.header.size()) + " fields, got " +
                        std::to_string(fields.size()));
    }
    t.rows.push_back(std::move(fields));
  }
  if (!have_header) {
    throw ConfigError(path + ": empty file (no header)");
  }
  return t;
}

double parse_double(const std::string& field, const std::string& path, std::size_t line) {
  if (field == "nan") {
    return std::nan("");
  }
  if (field == "inf") {
    return INFINITY;
  }
  if (field == "-inf") {
    return -INFINITY;
  }
  double v = 0.0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
  if (res.ec != std::errc() || res.ptr != field.data() + field.size()) {
    throw ConfigError(path + ": row " + std::to_string(line) + ": bad number '" + field + "'");
  }
  return v;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot write '" + path + "'");
  }
  out << text;
  if (!out) {
    throw IoError("write failed for '" + path + "'");
  }
}

}  // namespace csm::csv
