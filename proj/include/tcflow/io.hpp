#pragma once

#include <string>
#include <vector>

namespace tcflow {

/// Shortest-safe text form: 17 significant digits, '.' decimal, no locale.
std::string format_double(double x);

/// Writes `content` to `path`, creating parent directories. Throws std::runtime_error on failure.
void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

/// Comma-separated table with '#'-prefixed provenance lines above the header.
class CsvTable {
 public:
  explicit CsvTable(std::string header) : header_(std::move(header)) {}
  void add_comment(const std::string& line) { comments_.push_back(line); }
  void add_row(std::string row) { rows_.push_back(std::move(row)); }
  std::size_t size() const { return rows_.size(); }
  std::string str() const;

 private:
  std::string header_;
  std::vector<std::string> comments_;
  std::vector<std::string> rows_;
};

/// Joins already formatted cells with commas.
std::string csv_join(const std::vector<std::string>& cells);

}  // namespace tcflow
