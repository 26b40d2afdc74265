#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sod {

/// Raised for unreadable or unwritable files. Distinct from format errors so
/// front ends can map it to its own exit code.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CsvError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Minimal reader for the comma-separated tables used by this project
/// (no quoting, no embedded commas). Blank lines are skipped.
class CsvTable {
 public:
  static CsvTable parse(std::istream& in, std::string_view source_name = "<stream>");
  static CsvTable read(const std::filesystem::path& path);

  const std::vector<std::string>& header() const { return header_; }
  std::size_t rows() const { return rows_.size(); }

  /// Index of a header column; throws CsvError when missing.
  std::size_t column(std::string_view name) const;
  bool has_column(std::string_view name) const;

  const std::string& cell(std::size_t row, std::size_t col) const { return rows_[row][col]; }
  double number(std::size_t row, std::size_t col) const;
  long long integer(std::size_t row, std::size_t col) const;

  /// 1-based line number of a data row in the source, for diagnostics.
  std::size_t line_of(std::size_t row) const { return lines_[row]; }
  const std::string& source() const { return source_; }

  /// Throws unless the header starts with exactly these columns.
  void require_columns(std::initializer_list<std::string_view> names) const;

 private:
  std::string source_;
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
  std::vector<std::size_t> lines_;
};

/// Shortest round-trippable decimal text for a double.
std::string format_number(double value);

/// Fixed-point text with the given number of decimals.
std::string format_fixed(double value, int decimals);

/// Writes text to a file, creating parent directories. Throws IoError.
void write_text_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace sod
