// csv.cpp
#include "thermowork/csv.hpp"

#include <charconv>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace thermowork {

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

std::string format_number(std::optional<double> x) { return x ? format_number(*x) : std::string(); }

std::string csv_quote(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string csv_line(const CsvRow& row) {
  std::string line;
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) line += ',';
    line += csv_quote(row[i]);
  }
  line += '\n';
  return line;
}

CsvWriter::CsvWriter(std::ostream& out, CsvRow header, bool header_written)
    : out_(out), header_(std::move(header)) {
  if (header_.empty()) throw std::invalid_argument("CSV header must not be empty");
  if (!header_written) out_ << csv_line(header_);
}

void CsvWriter::write(const CsvRow& row) {
  if (row.size() != header_.size()) {
    throw std::invalid_argument("CSV row has " + std::to_string(row.size()) + " fields, header has " +
                                std::to_string(header_.size()));
  }
  out_ << csv_line(row);
  out_.flush();
  ++rows_;
}

std::vector<CsvRow> read_csv(const std::string& text, std::optional<std::size_t>* partial_tail) {
  std::vector<CsvRow> rows;
  CsvRow row;
  std::string field;
  bool quoted = false;
  std::size_t record_start = 0;
  std::size_t i = 0;
  if (partial_tail) partial_tail->reset();
  while (i < text.size()) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      ++i;
      continue;
    }
    if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
    } else if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') {
      // CRLF handled on the LF.
    } else if (c == '\n') {
      row.push_back(std::move(field));
      field.clear();
      rows.push_back(std::move(row));
      row.clear();
      record_start = i + 1;
    } else {
      field += c;
    }
    ++i;
  }
  if (record_start < text.size() && partial_tail) *partial_tail = record_start;
  return rows;
}

}  // namespace thermowork
