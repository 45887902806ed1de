#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace cpbo {

// Shortest decimal text that parses back to exactly the same double.
std::string format_double(double v);
double parse_double(std::string_view s);
long long parse_int(std::string_view s);

// Splits on runs of whitespace.
std::vector<std::string> split_fields(std::string_view line);

// Tab-separated table with a header row. Cells are stored as text so that a
// table read back from disk re-emits byte-identically.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(std::string_view name) const;
  void add_row(std::vector<std::string> row);
};

void write_table(const std::filesystem::path& path, const Table& table);
Table read_table(const std::filesystem::path& path);

void write_text_file(const std::filesystem::path& path,
                     const std::string& content);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace cpbo
