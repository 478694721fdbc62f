#include "survey/csv.h"

#include <fstream>
#include <sstream>

#include "survey/errors.h"

namespace survey::csv {
namespace {

constexpr std::string_view kBom = "\xEF\xBB\xBF";

class Reader {
 public:
  Reader(std::string_view content, char delimiter)
      : in_(content), delim_(delimiter) {}

  bool done() const { return pos_ >= in_.size(); }

  // Reads one record. Returns false when the record was malformed; the
  // message is left in error_ and the reader is positioned after it.
  bool next(Row& row) {
    row.fields.clear();
    row.line = line_;
    std::string field;
    bool quoted = false;
    bool after_quote = false;
    for (;;) {
      if (pos_ >= in_.size()) {
        if (quoted) {
          error_ = "unterminated quoted field";
          return false;
        }
        row.fields.push_back(std::move(field));
        return true;
      }
      const char c = in_[pos_++];
      if (quoted) {
        if (c == '"') {
          if (pos_ < in_.size() && in_[pos_] == '"') {
            field.push_back('"');
            ++pos_;
          } else {
            quoted = false;
            after_quote = true;
          }
        } else {
          if (c == '\n') ++line_;
          field.push_back(c);
        }
        continue;
      }
      if (c == delim_) {
        row.fields.push_back(std::move(field));
        field.clear();
        after_quote = false;
      } else if (c == '\n' || c == '\r') {
        if (c == '\r' && pos_ < in_.size() && in_[pos_] == '\n') ++pos_;
        ++line_;
        row.fields.push_back(std::move(field));
        return true;
      } else if (after_quote) {
        error_ = "unexpected character after closing quote";
        skip_line();
        return false;
      } else if (c == '"' && field.empty()) {
        quoted = true;
      } else {
        field.push_back(c);
      }
    }
  }

  const std::string& error() const { return error_; }

  // Consumes an empty physical line, if one starts here.
  bool skip_blank_line() {
    if (pos_ < in_.size() && (in_[pos_] == '\n' || in_[pos_] == '\r')) {
      if (in_[pos_] == '\r' && pos_ + 1 < in_.size() && in_[pos_ + 1] == '\n') ++pos_;
      ++pos_;
      ++line_;
      return true;
    }
    return false;
  }

 private:
  void skip_line() {
    while (pos_ < in_.size()) {
      const char c = in_[pos_++];
      if (c == '\n') {
        ++line_;
        return;
      }
    }
  }

  std::string_view in_;
  char delim_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::string error_;
};

}  // namespace

Table parse(std::string_view content, char delimiter) {
  if (content.starts_with(kBom)) content.remove_prefix(kBom.size());
  Table table;
  Reader reader(content, delimiter);
  Row row;
  bool have_header = false;
  while (!reader.done()) {
    if (reader.skip_blank_line()) continue;
    if (!reader.next(row)) {
      table.errors.push_back({row.line, reader.error()});
      continue;
    }
    if (!have_header) {
      table.header = std::move(row.fields);
      have_header = true;
      continue;
    }
    if (row.fields.size() != table.header.size()) {
      table.errors.push_back(
          {row.line, "expected " + std::to_string(table.header.size()) +
                         " fields, found " + std::to_string(row.fields.size())});
      continue;
    }
    table.rows.push_back(std::move(row));
    row = Row{};
  }
  return table;
}

Table read_file(const std::filesystem::path& path, char delimiter) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw IoError("failed reading " + path.string());
  return parse(buffer.str(), delimiter);
}

std::string format_field(std::string_view field, char delimiter) {
  const bool needs_quotes =
      field.find_first_of(std::string{'"', '\n', '\r', delimiter}) !=
          std::string_view::npos ||
      (!field.empty() && (field.front() == ' ' || field.back() == ' '));
  if (!needs_quotes) return std::string(field);
  std::string out = "\"";
  for (const char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string format_row(std::span<const std::string> fields, char delimiter) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) out.push_back(delimiter);
    out += format_field(fields[i], delimiter);
  }
  return out;
}

}  // namespace survey::csv
