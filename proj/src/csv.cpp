#include "loadshift/core/csv.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>

#include "loadshift/core/errors.hpp"

namespace loadshift::csv {

namespace {

std::string trim(const std::string& s) {
  size_t b = 0;
  size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

}  // namespace

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  size_t start = 0;
  while (true) {
    size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(trim(line.substr(start)));
      break;
    }
    fields.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return fields;
}

int Table::column(const std::string& name) const {
  for (size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<int>(i);
  return -1;
}

int Table::require_column(const std::string& name) const {
  int col = column(name);
  if (col < 0) throw ParseError(path, 1, "missing required column '" + name + "'");
  return col;
}

Table read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, "cannot open file");

  Table table;
  table.path = path;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    if (table.header.empty()) {
      table.header = split_line(stripped);
      continue;
    }
    Row row;
    row.line = line_no;
    row.fields = split_line(stripped);
    if (row.fields.size() != table.header.size())
      throw ParseError(path, line_no,
                       "expected " + std::to_string(table.header.size()) +
                           " fields, found " + std::to_string(row.fields.size()));
    table.rows.push_back(std::move(row));
  }
  if (table.header.empty()) throw ParseError(path, 0, "file has no header row");
  return table;
}

double to_double(const Table& table, const Row& row, int col) {
  const std::string& field = row.fields[col];
  try {
    size_t used = 0;
    double value = std::stod(field, &used);
    if (used != field.size()) throw std::invalid_argument(field);
    return value;
  } catch (const std::exception&) {
    throw ParseError(table.path, row.line,
                     "not a number: '" + field + "' in column '" +
                         table.header[col] + "'");
  }
}

long long to_int(const Table& table, const Row& row, int col) {
  const std::string& field = row.fields[col];
  try {
    size_t used = 0;
    long long value = std::stoll(field, &used);
    if (used != field.size()) throw std::invalid_argument(field);
    return value;
  } catch (const std::exception&) {
    throw ParseError(table.path, row.line,
                     "not an integer: '" + field + "' in column '" +
                         table.header[col] + "'");
  }
}

std::string format_number(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", value);
  std::string out(buf);
  if (out == "-0") out = "0";
  return out;
}

}  // namespace loadshift::csv
