#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace survey::csv {

struct Row {
  std::size_t line = 0;  // 1-based physical line where the record starts
  std::vector<std::string> fields;
};

struct RowError {
  std::size_t line = 0;
  std::string message;
};

struct Table {
  std::vector<std::string> header;
  std::vector<Row> rows;
  std::vector<RowError> errors;
};

// RFC 4180 reader: quoted fields may contain delimiters, doubled quotes and
// newlines; CRLF and LF line endings are accepted; blank lines are skipped;
// a leading UTF-8 BOM is ignored. Malformed records (stray text after a
// closing quote, unterminated quote, wrong field count) are collected in
// Table::errors and left out of Table::rows.
Table parse(std::string_view content, char delimiter = ',');

// Throws IoError when the file cannot be read.
Table read_file(const std::filesystem::path& path, char delimiter = ',');

std::string format_field(std::string_view field, char delimiter = ',');
std::string format_row(std::span<const std::string> fields, char delimiter = ',');

}  // namespace survey::csv
