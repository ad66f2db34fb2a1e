#include "scengen/csv.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "gtest/gtest.h"

namespace scengen {
namespace {

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

TEST(Csv, WriteReadRoundTrip) {
  const auto path = temp_file("scengen_csv_roundtrip.csv");
  const std::vector<std::string> comments = {"# dt=0.12", "# condition=5"};
  const std::vector<std::string> header = {"a", "b", "c"};
  const std::vector<std::vector<std::string>> rows = {
      {"1", "2.5", "x"}, {"-3", "0", "y"}};
  write_csv(path, comments, header, rows);

  const CsvTable t = read_csv(path);
  EXPECT_EQ(t.comments, comments);
  EXPECT_EQ(t.header, header);
  EXPECT_EQ(t.rows, rows);
  std::filesystem::remove(path);
}

TEST(Csv, ColumnLookup) {
  CsvTable t;
  t.header = {"frame", "x1", "y1"};
  EXPECT_EQ(t.column("x1"), 1);
  EXPECT_EQ(t.column("missing"), -1);
  EXPECT_EQ(t.require_column("y1"), 2);
  EXPECT_THROW(t.require_column("zz"), std::runtime_error);
}

TEST(Csv, ReadMissingFileThrows) {
  EXPECT_THROW(read_csv("/nonexistent/file.csv"), std::runtime_error);
}

TEST(Csv, RaggedRowThrows) {
  const auto path = temp_file("scengen_csv_ragged.csv");
  std::ofstream out(path);
  out << "a,b\n1,2\n3\n";
  out.close();
  EXPECT_THROW(read_csv(path), std::runtime_error);
  std::filesystem::remove(path);
}

TEST(Csv, FormatDoubleRoundTripsExactly) {
  const double values[] = {0.0,   1.0,        -1.0,     0.1,
                           0.12,  1.0 / 3.0,  1e-300,   1e300,
                           -2.5e-7, 3.141592653589793, 30329.0};
  for (double v : values) {
    const std::string s = format_double(v);
    EXPECT_EQ(std::strtod(s.c_str(), nullptr), v) << s;
  }
}

}  // namespace
}  // namespace scengen
