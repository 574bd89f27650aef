#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace gkdv {

/// 17 significant digits: round-trips any double, stable for diffing.
inline std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

/// Write-then-rename so readers never observe a partial file.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + tmp.string());
    out << content;
    if (!out.flush()) throw std::runtime_error("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

/// Fixed-column CSV accumulator with deterministic float formatting.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  void add_row(std::span<const double> values) {
    if (values.size() != columns_.size())
      throw std::invalid_argument("CsvTable: row width mismatch");
    rows_.emplace_back(values.begin(), values.end());
  }

  const std::vector<std::string>& columns() const { return columns_; }
  const std::vector<std::vector<double>>& rows() const { return rows_; }

  std::string to_string() const {
    std::string s;
    for (std::size_t c = 0; c < columns_.size(); ++c) {
      if (c) s += ',';
      s += columns_[c];
    }
    s += '\n';
    for (const auto& row : rows_) {
      for (std::size_t c = 0; c < row.size(); ++c) {
        if (c) s += ',';
        s += fmt17(row[c]);
      }
      s += '\n';
    }
    return s;
  }

  void save(const std::filesystem::path& path) const { atomic_write(path, to_string()); }

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<double>> rows_;
};

struct CsvData {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  int column_index(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
      if (columns[i] == name) return int(i);
    return -1;
  }
  std::vector<double> column(const std::string& name) const {
    int idx = column_index(name);
    if (idx < 0) throw std::invalid_argument("CSV column not found: " + name);
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r[std::size_t(idx)]);
    return out;
  }
};

inline CsvData read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open CSV: " + path.string());
  CsvData data;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
      std::size_t comma = line.find(',', start);
      cells.push_back(line.substr(start, comma == std::string::npos ? comma : comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (header) {
      data.columns = cells;
      header = false;
    } else {
      std::vector<double> row;
      row.reserve(cells.size());
      for (const auto& c : cells) row.push_back(std::stod(c));
      data.rows.push_back(std::move(row));
    }
  }
  return data;
}

}  // namespace gkdv
