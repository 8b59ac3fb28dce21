#ifndef MGFLEX_IO_CSV_HPP
#define MGFLEX_IO_CSV_HPP

// Comma-separated numeric tables with a mandatory header row. The first
// column of every profile table is the start minute of the step.

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "mgflex/core_model.hpp"
#include "mgflex/error.hpp"

namespace mgflex::io {

// Shortest text that reads back to the same double.
inline std::string format_number(double v) {
  if (v == 0.0) return "0";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io, "cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw Error(ErrorCode::io, "write failed for '" + path.string() + "'");
}

struct Table {
  std::string source;
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  int column(const std::string& name) const {
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (header[c] == name) return static_cast<int>(c);
    }
    return -1;
  }

  int require_column(const std::string& name) const {
    int c = column(name);
    if (c < 0) throw Error(ErrorCode::schema, source + ": missing column '" + name + "'");
    return c;
  }

  std::vector<double> values(int col) const {
    std::vector<double> v;
    v.reserve(rows.size());
    for (const auto& r : rows) v.push_back(r[col]);
    return v;
  }
};

namespace detail {

inline std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    auto b = cell.find_first_not_of(" \t\r");
    auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace detail

inline Table parse_table(const std::string& text, const std::string& source) {
  Table t;
  t.source = source;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto cells = detail::split_line(line);
    if (t.header.empty()) {
      t.header = std::move(cells);
      continue;
    }
    if (cells.size() != t.header.size()) {
      throw Error(ErrorCode::schema, source + ":" + std::to_string(lineno) + ": expected " +
                                         std::to_string(t.header.size()) + " fields, found " +
                                         std::to_string(cells.size()));
    }
    std::vector<double> row;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const std::string& s = cells[c];
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
        throw Error(ErrorCode::schema, source + ":" + std::to_string(lineno) + ": field '" +
                                           t.header[c] + "' is not a number: '" + s + "'");
      }
      row.push_back(v);
    }
    t.rows.push_back(std::move(row));
  }
  if (t.header.empty()) throw Error(ErrorCode::schema, source + ": missing header row");
  return t;
}

inline Table read_table(const std::filesystem::path& path) {
  return parse_table(read_text(path), path.string());
}

// Checks that a profile table has one row per step with a leading minute
// column matching the grid.
inline void check_profile_table(const Table& t, const TimeGrid& g) {
  if (t.header.empty() || t.header[0] != "minute") {
    throw Error(ErrorCode::schema, t.source + ": first column must be 'minute'");
  }
  if (t.rows.size() != g.size()) {
    throw Error(ErrorCode::dimension, t.source + ": has " + std::to_string(t.rows.size()) +
                                          " rows, the time grid needs " + std::to_string(g.size()));
  }
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    if (t.rows[i][0] != g.minute_of(i)) {
      throw Error(ErrorCode::schema, t.source + ": row " + std::to_string(i + 1) + " has minute " +
                                         format_number(t.rows[i][0]) + ", expected " +
                                         std::to_string(g.minute_of(i)));
    }
  }
}

inline Profile profile_column(const Table& t, const TimeGrid& g, const std::string& name) {
  try {
    return Profile(g, t.values(t.require_column(name)));
  } catch (const Error& e) {
    throw Error(e.code(), t.source + ": column '" + name + "': " + e.what());
  }
}

// Builds a profile table: minute column followed by the named series.
class TableWriter {
 public:
  explicit TableWriter(const TimeGrid& g) : grid_(g) {}

  void add(std::string name, std::vector<double> values) {
    if (values.size() != grid_.size()) {
      throw Error(ErrorCode::dimension, "column '" + name + "' has the wrong length");
    }
    names_.push_back(std::move(name));
    columns_.push_back(std::move(values));
  }

  std::string str() const {
    std::string out = "minute";
    for (const auto& n : names_) out += "," + n;
    out += "\n";
    for (std::size_t i = 0; i < grid_.size(); ++i) {
      out += std::to_string(grid_.minute_of(i));
      for (const auto& c : columns_) out += "," + format_number(c[i]);
      out += "\n";
    }
    return out;
  }

 private:
  TimeGrid grid_;
  std::vector<std::string> names_;
  std::vector<std::vector<double>> columns_;
};

}  // namespace mgflex::io

#endif  // MGFLEX_IO_CSV_HPP
