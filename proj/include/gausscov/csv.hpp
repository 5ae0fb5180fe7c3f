#pragma once

#include <charconv>
#include <cstddef>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "gausscov/data_matrix.hpp"
#include "gausscov/error.hpp"

namespace gausscov {

enum class HeaderMode { automatic, present, absent };
enum class NaPolicy { reject, drop_row };

struct CsvOptions {
  HeaderMode header = HeaderMode::automatic;
  char delimiter = ',';
  NaPolicy na_policy = NaPolicy::reject;
};

namespace detail {

// Splits CSV text into records of raw fields. Double quotes enclose fields
// that may contain the delimiter, newlines or "" for a literal quote.
inline std::vector<std::vector<std::string>> split_csv(std::string_view text, char delim) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  std::size_t line = 1;
  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    const bool blank = record.size() == 1 && record[0].empty();
    if (!blank) records.push_back(std::move(record));
    record.clear();
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
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
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    if (c == '"' && !field_started) {
      quoted = true;
      field_started = true;
    } else if (c == delim) {
      end_field();
    } else if (c == '\n') {
      end_record();
      ++line;
    } else if (c == '\r') {
      // tolerate CRLF line endings
    } else {
      field += c;
      field_started = true;
    }
  }
  if (quoted) throw ParseError("unterminated quoted field", line, record.size() + 1);
  if (field_started || !field.empty() || !record.empty()) end_record();
  return records;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

inline bool is_missing(std::string_view s) {
  s = trim(s);
  return s.empty() || s == "NA" || s == "NaN" || s == "nan" || s == "N/A" || s == "null";
}

inline bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace detail

// Numeric table from CSV text. Column names come from the header row or
// are synthesized as x1..xq. Errors carry 1-based record and field numbers
// counted from the top of the file.
inline DataMatrix parse_csv(std::string_view text, const CsvOptions& options = {}) {
  auto records = detail::split_csv(text, options.delimiter);
  if (records.empty()) throw ParseError("empty input");
  bool has_header = options.header == HeaderMode::present;
  if (options.header == HeaderMode::automatic) {
    for (const auto& f : records.front()) {
      double v;
      if (!detail::is_missing(f) && !detail::parse_double(f, v)) has_header = true;
    }
  }
  const std::size_t q = records.front().size();
  std::vector<std::string> names;
  if (has_header) {
    for (const auto& f : records.front()) names.emplace_back(detail::trim(f));
  } else {
    names = default_names(q);
  }
  const std::size_t first = has_header ? 1 : 0;
  std::vector<std::vector<double>> rows;
  for (std::size_t r = first; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.size() != q)
      throw ParseError("expected " + std::to_string(q) + " fields, found " + std::to_string(rec.size()),
                       r + 1, std::min(rec.size(), q) + 1);
    std::vector<double> row(q);
    bool drop = false;
    for (std::size_t c = 0; c < q; ++c) {
      if (detail::is_missing(rec[c])) {
        if (options.na_policy == NaPolicy::reject) throw MissingValue(r + 1, c + 1);
        drop = true;
        break;
      }
      if (!detail::parse_double(rec[c], row[c]))
        throw ParseError("not a number: '" + rec[c] + "'", r + 1, c + 1);
      if (!std::isfinite(row[c])) throw ParseError("non-finite value", r + 1, c + 1);
    }
    if (!drop) rows.push_back(std::move(row));
  }
  const std::size_t n = rows.size();
  std::vector<double> values(n * q);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < q; ++c) values[c * n + i] = rows[i][c];
  return DataMatrix(n, q, std::move(values), std::move(names));
}

inline DataMatrix load_csv(const std::string& path, const CsvOptions& options = {}) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_csv(buffer.str(), options);
}

namespace detail {

inline std::string csv_field(const std::string& s, char delim) {
  if (s.find_first_of(std::string{delim, '"', '\n', '\r'}) == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::string format_double(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace detail

// Matrix as CSV with a header row. Values use the shortest representation
// that reads back to the same double.
template <ColumnSource M>
void write_csv(std::ostream& os, const M& m, const std::vector<std::string>& names, char delim = ',') {
  for (std::size_t j = 0; j < m.cols(); ++j) {
    if (j) os << delim;
    os << detail::csv_field(j < names.size() ? names[j] : "x" + std::to_string(j + 1), delim);
  }
  os << '\n';
  // row-major output from column storage, one column buffer per column
  std::vector<std::vector<double>> scratch(m.cols());
  std::vector<std::span<const double>> cols;
  cols.reserve(m.cols());
  for (std::size_t j = 0; j < m.cols(); ++j) cols.push_back(m.column(j, scratch[j]));
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j) os << delim;
      os << detail::format_double(cols[j][i]);
    }
    os << '\n';
  }
}

inline void write_csv(std::ostream& os, const DataMatrix& m, char delim = ',') {
  write_csv(os, m, m.names(), delim);
}

// 1-based column index and name, tab separated.
inline void write_name_map(std::ostream& os, const std::vector<std::string>& names) {
  os << "index\tname\n";
  for (std::size_t j = 0; j < names.size(); ++j) os << j + 1 << '\t' << names[j] << '\n';
}

}  // namespace gausscov
