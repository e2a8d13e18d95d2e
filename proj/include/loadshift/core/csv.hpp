#pragma once

#include <string>
#include <vector>

namespace loadshift::csv {

/// One parsed data row plus its 1-based source line for error reporting.
struct Row {
  int line = 0;
  std::vector<std::string> fields;
};

/// Parsed CSV file: a header row followed by data rows.  Blank lines and
/// lines starting with '#' are skipped.  Fields are trimmed of surrounding
/// whitespace; quoting is not supported.
struct Table {
  std::string path;
  std::vector<std::string> header;
  std::vector<Row> rows;

  /// Column position of `name`, or -1 when absent.
  int column(const std::string& name) const;

  /// Column position of `name`; throws ParseError when absent.
  int require_column(const std::string& name) const;
};

/// Reads and tokenizes a CSV file.  Throws ParseError on I/O failure or when
/// a data row has a different field count than the header.
Table read_file(const std::string& path);

/// Splits one line on commas and trims each field.
std::vector<std::string> split_line(const std::string& line);

/// Field conversions with file:line context in error messages.
double to_double(const Table& table, const Row& row, int col);
long long to_int(const Table& table, const Row& row, int col);

/// Formats a double with up to 9 significant digits and no locale
/// dependence, so emitted files are byte-stable across runs.
std::string format_number(double value);

}  // namespace loadshift::csv
