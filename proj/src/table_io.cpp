#include "cpbo/table_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

#include "cpbo/errors.hpp"

namespace cpbo {

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) throw IoError("format_double: conversion failed");
  return std::string(buf, end);
}

double parse_double(std::string_view s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw IoError("cannot parse number '" + std::string(s) + "'");
  return v;
}

long long parse_int(std::string_view s) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw IoError("cannot parse integer '" + std::string(s) + "'");
  return v;
}

std::vector<std::string> split_fields(std::string_view line) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' ||
                               line[i] == '\r'))
      ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' &&
           line[j] != '\r')
      ++j;
    if (j > i) out.emplace_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::size_t Table::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw IoError("table has no column '" + std::string(name) + "'");
}

void Table::add_row(std::vector<std::string> row) {
  if (row.size() != header.size())
    throw DimensionError("table row width does not match header");
  rows.push_back(std::move(row));
}

void write_text_file(const std::filesystem::path& path,
                     const std::string& content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec)
      throw IoError("cannot create directory " +
                    path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << content;
  if (!out) throw IoError("write failed: " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_table(const std::filesystem::path& path, const Table& table) {
  std::string s;
  auto emit = [&s](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) s += '\t';
      s += cells[i];
    }
    s += '\n';
  };
  emit(table.header);
  for (const auto& r : table.rows) emit(r);
  write_text_file(path, s);
}

Table read_table(const std::filesystem::path& path) {
  std::istringstream in(read_text_file(path));
  Table t;
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty table " + path.string());
  t.header = split_fields(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto f = split_fields(line);
    if (f.size() != t.header.size())
      throw IoError("malformed row in " + path.string());
    t.rows.push_back(std::move(f));
  }
  return t;
}

}  // namespace cpbo
