#include "scengen/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace scengen {

int CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<int>(i);
  }
  return -1;
}

int CsvTable::require_column(const std::string& name) const {
  const int idx = column(name);
  if (idx < 0) {
    throw std::runtime_error("csv: missing required column '" + name + "'");
  }
  return idx;
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  for (char c : line) {
    if (c == ',') {
      out.push_back(std::move(field));
      field.clear();
    } else if (c != '\r') {
      field.push_back(c);
    }
  }
  out.push_back(std::move(field));
  return out;
}

}  // namespace

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("csv: cannot open '" + path.string() + "'");
  }
  CsvTable table;
  std::string line;
  bool header_read = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!header_read && !line.empty() && line[0] == '#') {
      table.comments.push_back(line);
      continue;
    }
    if (line.empty()) continue;
    auto fields = split_fields(line);
    if (!header_read) {
      table.header = std::move(fields);
      header_read = true;
      continue;
    }
    if (fields.size() != table.header.size()) {
      throw std::runtime_error("csv: '" + path.string() + "' line " +
                               std::to_string(line_no) + " has " +
                               std::to_string(fields.size()) + " fields, expected " +
                               std::to_string(table.header.size()));
    }
    table.rows.push_back(std::move(fields));
  }
  if (!header_read) {
    throw std::runtime_error("csv: '" + path.string() + "' has no header row");
  }
  return table;
}

void write_csv(const std::filesystem::path& path,
               const std::vector<std::string>& comments,
               const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("csv: cannot write '" + path.string() + "'");
  }
  for (const auto& c : comments) out << c << '\n';
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) out << ',';
    out << header[i];
  }
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      out << row[i];
    }
    out << '\n';
  }
  if (!out) {
    throw std::runtime_error("csv: write failed for '" + path.string() + "'");
  }
}

std::string format_double(double v) {
  char buf[32];
  // Try increasing precision until the value round-trips.
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    double back = 0.0;
    std::sscanf(buf, "%lf", &back);
    if (back == v) break;
  }
  return buf;
}

}  // namespace scengen
