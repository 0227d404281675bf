// csv.hpp - RFC 4180 writer/reader with deterministic number formatting
#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace thermowork {

/// Shortest decimal form that round-trips exactly; "nan", "inf", "-inf" for
/// non-finite values.
std::string format_number(double x);
std::string format_number(std::optional<double> x);  // empty when absent

/// Quotes a field when it contains a comma, quote, CR or LF.
std::string csv_quote(const std::string& field);

using CsvRow = std::vector<std::string>;

std::string csv_line(const CsvRow& row);

class CsvWriter {
 public:
  /// Writes the header immediately unless `header_written` is set.
  CsvWriter(std::ostream& out, CsvRow header, bool header_written = false);

  /// Throws std::invalid_argument if the row width differs from the header.
  void write(const CsvRow& row);
  const CsvRow& header() const { return header_; }
  std::size_t rows_written() const { return rows_; }

 private:
  std::ostream& out_;
  CsvRow header_;
  std::size_t rows_ = 0;
};

/// Parses complete records. A trailing record without its line terminator is
/// reported through `partial_tail` (byte offset of its start) and not returned.
std::vector<CsvRow> read_csv(const std::string& text, std::optional<std::size_t>* partial_tail = nullptr);

}  // namespace thermowork
