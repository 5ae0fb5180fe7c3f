#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gausscov/error.hpp"

namespace gausscov {

// Anything the stepwise engine can scan: a fixed number of rows and columns,
// with column j readable as a contiguous span. Sources that compute columns
// on the fly write into `scratch` and return a view of it; stored matrices
// ignore `scratch` and return a view of their own storage.
template <class S>
concept ColumnSource = requires(const S& s, std::size_t j, std::vector<double>& scratch) {
  { s.rows() } -> std::convertible_to<std::size_t>;
  { s.cols() } -> std::convertible_to<std::size_t>;
  { s.column(j, scratch) } -> std::convertible_to<std::span<const double>>;
};

inline std::vector<std::string> default_names(std::size_t q, const std::string& prefix = "x") {
  std::vector<std::string> names;
  names.reserve(q);
  for (std::size_t j = 0; j < q; ++j) names.push_back(prefix + std::to_string(j + 1));
  return names;
}

class DataMatrix;
struct StandardizeResult;
inline StandardizeResult standardize(const DataMatrix& m);

// Column-major n x q matrix of finite doubles with column names and a
// per-column standardization flag. Immutable once constructed.
class DataMatrix {
 public:
  DataMatrix() = default;

  DataMatrix(std::size_t n, std::size_t q, std::vector<double> values,
             std::vector<std::string> names = {})
      : n_(n), q_(q), values_(std::move(values)), names_(std::move(names)),
        standardized_(q, false) {
    if (values_.size() != n * q)
      throw DomainError("matrix storage has " + std::to_string(values_.size()) +
                        " values, expected " + std::to_string(n * q));
    if (names_.empty()) names_ = default_names(q);
    if (names_.size() != q) throw DomainError("column name count does not match q");
    for (std::size_t j = 0; j < q_; ++j) {
      for (double v : column(j)) {
        if (!std::isfinite(v))
          throw DomainError("column " + std::to_string(j + 1) + " contains a non-finite value");
      }
    }
  }

  static DataMatrix from_columns(const std::vector<std::vector<double>>& columns,
                                 std::vector<std::string> names = {}) {
    const std::size_t q = columns.size();
    const std::size_t n = q == 0 ? 0 : columns.front().size();
    std::vector<double> values;
    values.reserve(n * q);
    for (const auto& c : columns) {
      if (c.size() != n) throw DomainError("columns have different lengths");
      values.insert(values.end(), c.begin(), c.end());
    }
    return DataMatrix(n, q, std::move(values), std::move(names));
  }

  std::size_t rows() const noexcept { return n_; }
  std::size_t cols() const noexcept { return q_; }

  std::span<const double> column(std::size_t j) const noexcept {
    return {values_.data() + j * n_, n_};
  }
  std::span<const double> column(std::size_t j, std::vector<double>&) const noexcept {
    return column(j);
  }
  double operator()(std::size_t i, std::size_t j) const noexcept { return values_[j * n_ + i]; }

  const std::vector<std::string>& names() const noexcept { return names_; }
  const std::string& name(std::size_t j) const { return names_.at(j); }
  bool standardized(std::size_t j) const { return standardized_.at(j); }

  // Index of the column called `name`, or cols() if absent.
  std::size_t find(const std::string& name) const {
    auto it = std::find(names_.begin(), names_.end(), name);
    return static_cast<std::size_t>(it - names_.begin());
  }

  // Copy without column `j`. Used to split a response off a loaded table.
  DataMatrix without_column(std::size_t j) const {
    std::vector<double> values;
    values.reserve(n_ * (q_ - 1));
    std::vector<std::string> names;
    std::vector<bool> flags;
    for (std::size_t c = 0; c < q_; ++c) {
      if (c == j) continue;
      auto col = column(c);
      values.insert(values.end(), col.begin(), col.end());
      names.push_back(names_[c]);
      flags.push_back(standardized_[c]);
    }
    DataMatrix out(n_, q_ - 1, std::move(values), std::move(names));
    out.standardized_ = std::move(flags);
    return out;
  }

  // Same data with columns in the order given by `order`.
  DataMatrix permuted(std::span<const std::size_t> order) const {
    std::vector<double> values;
    values.reserve(n_ * order.size());
    std::vector<std::string> names;
    std::vector<bool> flags;
    for (std::size_t c : order) {
      auto col = column(c);
      values.insert(values.end(), col.begin(), col.end());
      names.push_back(names_.at(c));
      flags.push_back(standardized_.at(c));
    }
    DataMatrix out(n_, order.size(), std::move(values), std::move(names));
    out.standardized_ = std::move(flags);
    return out;
  }

  const std::vector<double>& storage() const noexcept { return values_; }

 private:
  friend StandardizeResult standardize(const DataMatrix& m);

  std::size_t n_ = 0;
  std::size_t q_ = 0;
  std::vector<double> values_;
  std::vector<std::string> names_;
  std::vector<bool> standardized_;
};

struct StandardizeResult {
  DataMatrix matrix;
  // Columns with zero sample variance. They are left untouched and keep
  // their unstandardized flag.
  std::vector<std::size_t> constant_columns;
};

// Mean zero, unit sample variance (n - 1 denominator) for every non-constant
// column.
inline StandardizeResult standardize(const DataMatrix& m) {
  const std::size_t n = m.rows();
  std::vector<double> values(m.storage());
  std::vector<std::size_t> constant;
  std::vector<std::size_t> scaled;
  for (std::size_t j = 0; j < m.cols(); ++j) {
    std::span<double> col(values.data() + j * n, n);
    auto [lo, hi] = std::minmax_element(col.begin(), col.end());
    if (n < 2 || *lo == *hi) {
      constant.push_back(j);
      continue;
    }
    double mean = 0.0;
    for (double v : col) mean += v;
    mean /= static_cast<double>(n);
    for (double& v : col) v -= mean;
    // second pass removes the rounding residue of the first mean
    double resid = 0.0;
    for (double v : col) resid += v;
    resid /= static_cast<double>(n);
    double ss = 0.0;
    for (double& v : col) {
      v -= resid;
      ss += v * v;
    }
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    for (double& v : col) v /= sd;
    scaled.push_back(j);
  }
  if (scaled.empty()) throw AllColumnsConstant();
  DataMatrix out(n, m.cols(), std::move(values), m.names());
  out.standardized_ = m.standardized_;
  for (std::size_t j : scaled) out.standardized_[j] = true;
  return {std::move(out), std::move(constant)};
}

}  // namespace gausscov
