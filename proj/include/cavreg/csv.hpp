#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace cavreg {

// Shortest decimal representation that round-trips the exact double.
std::string format_double(double v);

// Builder for the CSV outputs: '#'-prefixed header comments, one header row,
// then data rows.
class CsvBuilder {
 public:
  explicit CsvBuilder(std::vector<std::string> columns);

  // header comment, above the column row
  void add_comment(const std::string& line);

  // comment interleaved with the data rows (e.g. block separators)
  void add_inline_comment(const std::string& line);

  // cells are pre-formatted strings
  void add_row(const std::vector<std::string>& cells);

  std::string str() const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::string> comments_;
  std::vector<std::string> rows_;
};

// Write via a temp file in the same directory plus rename, so readers never
// observe a partial file.
void write_file_atomic(const std::string& path, const std::string& content);

// FNV-1a over a string; used to stamp outputs with a config hash.
std::uint64_t fnv1a(const std::string& text);

}  // namespace cavreg
