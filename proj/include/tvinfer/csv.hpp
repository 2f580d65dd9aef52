#pragma once

#include <filesystem>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

#include "tvinfer/types.hpp"

namespace tvinfer {

/// Shortest decimal string that parses back to exactly `x`.
std::string format_double(double x);

/// Headered numeric CSV.
struct CsvTable {
  std::vector<std::string> header;
  Matrix values;  // rows x header.size()

  /// Column position by name; DataError naming the column when absent.
  Index column(std::string_view name) const;
  bool has_column(std::string_view name) const;
};

/// Parses comma-separated numbers under a header row. Errors report the
/// 1-based line number.
CsvTable read_csv(std::istream& in, const std::string& source = "<stream>");
CsvTable read_csv(const std::filesystem::path& path);

/// Design columns x1..xp (in order) and response column y.
Dataset dataset_from_csv(const CsvTable& table, const std::string& response = "y");

/// Comma-joined fields.
std::string csv_row(const std::vector<std::string>& fields);

}  // namespace tvinfer
