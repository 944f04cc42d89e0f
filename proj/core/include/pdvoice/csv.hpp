#pragma once

// Small CSV reader/writer. Handles quoting for fields containing commas,
// quotes or newlines; skips '#' comment lines on read.

#include <string>
#include <vector>

namespace pdvoice::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Index of a header column, -1 if absent.
  int column(const std::string& name) const;
};

std::string escape_field(const std::string& field);
std::vector<std::string> parse_line(const std::string& line);

// Reads a CSV file with a header row. Lines starting with '#' are ignored.
Table read_file(const std::string& path);

std::string format_row(const std::vector<std::string>& fields);

}  // namespace pdvoice::csv
