#pragma once

#include <cerrno>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "plrd/dataset.hpp"
#include "plrd/error.hpp"

namespace plrd {
namespace csv {

//! Comma-separated numeric table: header row required, UTF-8, '.' decimal.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;  // column-major, aligned with header

  int rows() const { return columns.empty() ? 0 : static_cast<int>(columns.front().size()); }

  int column_index(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return static_cast<int>(i);
    }
    throw Error(ErrorCode::csv_parse, "io",
                "column '" + name + "' not found in header");
  }
};

namespace detail {

inline std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

inline std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

} // namespace detail

inline Table read(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::io_error, "io", "cannot open '" + path + "' for reading");
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorCode::csv_parse, "io", "'" + path + "' is empty; header row required");
  }
  Table t;
  for (const auto& name : detail::split_line(line)) {
    t.header.push_back(detail::trim(name));
  }
  t.columns.assign(t.header.size(), {});
  int row = 1;  // 1-based data row numbers in error messages
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto cells = detail::split_line(line);
    if (cells.size() != t.header.size()) {
      throw Error(ErrorCode::csv_parse, "io",
                  "row " + std::to_string(row) + ": expected " +
                  std::to_string(t.header.size()) + " cells, got " +
                  std::to_string(cells.size()));
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const std::string cell = detail::trim(cells[c]);
      errno = 0;
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (cell.empty() || end != cell.c_str() + cell.size() || errno == ERANGE) {
        throw Error(ErrorCode::csv_parse, "io",
                    "row " + std::to_string(row) + ", column '" + t.header[c] +
                    "': cannot parse '" + cell + "' as a number");
      }
      t.columns[c].push_back(v);
    }
    ++row;
  }
  return t;
}

inline RdDataset load_dataset(const std::string& path, const std::string& x_column,
                              const std::string& y_column, double cutoff) {
  const Table t = read(path);
  const int xi = t.column_index(x_column);
  const int yi = t.column_index(y_column);
  return make_dataset(t.columns[static_cast<std::size_t>(xi)],
                      t.columns[static_cast<std::size_t>(yi)], cutoff);
}

//! Write-to-temp then atomic rename; no partially written file survives an error.
inline void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(target.parent_path(), ec);
  }
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw Error(ErrorCode::io_error, "io", "cannot open '" + tmp.string() + "' for writing");
    }
    out << content;
    if (!out.good()) {
      throw Error(ErrorCode::io_error, "io", "write failed for '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw Error(ErrorCode::io_error, "io",
                "rename to '" + path + "' failed: " + ec.message());
  }
}

} // namespace csv
} // namespace plrd
