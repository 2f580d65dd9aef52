#include "tvinfer/csv.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "tvinfer/error.hpp"

namespace tvinfer {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  std::array<char, 32> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), end);
}

Index CsvTable::column(std::string_view name) const {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw DataError("missing column '" + std::string(name) + "'");
  return static_cast<Index>(it - header.begin());
}

bool CsvTable::has_column(std::string_view name) const {
  return std::find(header.begin(), header.end(), name) != header.end();
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

CsvTable read_csv(std::istream& in, const std::string& source) {
  CsvTable table;
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = trim(line);
    if (view.empty()) continue;
    const auto fields = split(view);
    if (table.header.empty()) {
      for (auto f : fields) {
        if (f.empty()) throw DataError(source + ":" + std::to_string(line_no) + ": empty column name");
        table.header.emplace_back(f);
      }
      continue;
    }
    if (fields.size() != table.header.size())
      throw DataError(source + ":" + std::to_string(line_no) + ": expected " + std::to_string(table.header.size()) +
                      " fields, found " + std::to_string(fields.size()));
    std::vector<double> row(fields.size());
    for (std::size_t k = 0; k < fields.size(); ++k) {
      const auto f = fields[k];
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), row[k]);
      if (ec != std::errc() || ptr != f.data() + f.size() || f.empty())
        throw DataError(source + ":" + std::to_string(line_no) + ": column '" + table.header[k] +
                        "': cannot parse '" + std::string(f) + "'");
    }
    rows.push_back(std::move(row));
  }
  if (table.header.empty()) throw DataError(source + ": no header row");
  table.values.resize(static_cast<Index>(rows.size()), static_cast<Index>(table.header.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t k = 0; k < rows[i].size(); ++k)
      table.values(static_cast<Index>(i), static_cast<Index>(k)) = rows[i][k];
  return table;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return read_csv(in, path.string());
}

Dataset dataset_from_csv(const CsvTable& table, const std::string& response) {
  const Index y_col = table.column(response);
  std::vector<Index> x_cols;
  for (Index j = 1;; ++j) {
    const std::string name = "x" + std::to_string(j);
    if (!table.has_column(name)) break;
    x_cols.push_back(table.column(name));
  }
  if (x_cols.empty()) throw DataError("missing column 'x1'");
  Matrix X(table.values.rows(), static_cast<Index>(x_cols.size()));
  for (std::size_t k = 0; k < x_cols.size(); ++k) X.col(static_cast<Index>(k)) = table.values.col(x_cols[k]);
  return Dataset(std::move(X), table.values.col(y_col));
}

std::string csv_row(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t k = 0; k < fields.size(); ++k) {
    if (k) out += ',';
    out += fields[k];
  }
  return out;
}

}  // namespace tvinfer
