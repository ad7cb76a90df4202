#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace viana::csv {

/// Shortest round-trip decimal form via std::to_chars: locale independent,
/// so emitted files are byte-identical across runs and machines.
inline std::string format_double(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

using Cell = std::variant<std::string, double, std::int64_t>;

inline std::string cell_to_string(const Cell& c) {
  if (std::holds_alternative<std::string>(c)) return std::get<std::string>(c);
  if (std::holds_alternative<double>(c)) return format_double(std::get<double>(c));
  return std::to_string(std::get<std::int64_t>(c));
}

/// Comma-delimited table with a mandatory header row.
class Table {
 public:
  explicit Table(std::vector<std::string> header) : header_(std::move(header)) {}

  template <typename... Ts>
  void add_row(Ts&&... cells) {
    std::vector<Cell> row{Cell(std::forward<Ts>(cells))...};
    if (row.size() != header_.size())
      throw std::logic_error("csv::Table: row width does not match header");
    rows_.push_back(std::move(row));
  }

  void add_row_cells(std::vector<Cell> row) {
    if (row.size() != header_.size())
      throw std::logic_error("csv::Table: row width does not match header");
    rows_.push_back(std::move(row));
  }

  std::string to_string() const {
    std::string out;
    for (std::size_t i = 0; i < header_.size(); ++i) {
      if (i) out += ',';
      out += header_[i];
    }
    out += '\n';
    for (const auto& row : rows_) {
      for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) out += ',';
        out += cell_to_string(row[i]);
      }
      out += '\n';
    }
    return out;
  }

  void write(const std::filesystem::path& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path.string());
    f << to_string();
  }

  std::size_t row_count() const { return rows_.size(); }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<Cell>> rows_;
};

/// FNV-1a over bytes; used to stamp a config fingerprint into summaries.
inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[std::size_t(i)] = digits[v & 0xF];
    v >>= 4;
  }
  return s;
}

}  // namespace viana::csv
