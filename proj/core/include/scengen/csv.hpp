#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace scengen {

/// In-memory CSV with a header row. Leading lines starting with '#' are kept
/// aside as comments (scenario files carry metadata there).
struct CsvTable {
  std::vector<std::string> comments;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of a header column, or -1.
  int column(const std::string& name) const;
  /// Index of a header column; throws listing the missing name.
  int require_column(const std::string& name) const;
};

/// Reads a CSV file. Throws std::runtime_error if the file cannot be opened
/// or a row has a different field count than the header.
CsvTable read_csv(const std::filesystem::path& path);

/// Writes rows joined with commas; caller supplies preformatted fields.
void write_csv(const std::filesystem::path& path,
               const std::vector<std::string>& comments,
               const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

/// Shortest decimal representation that round-trips the double exactly.
std::string format_double(double v);

}  // namespace scengen
