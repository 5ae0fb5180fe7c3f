#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "gausscov/data_matrix.hpp"
#include "gausscov/error.hpp"

namespace gausscov {

// Lags min_lag..max_lag of the chosen source variables, variable-major: the
// L lags of the first chosen variable, then those of the second, and so on.
// Lag l of the v-th chosen variable (both 1-based) is column (v-1)*L + l - min_lag + 1.
struct LagSpec {
  std::size_t min_lag = 1;
  std::size_t max_lag = 1;
  std::vector<std::size_t> variables;  // 0-based source columns; empty means all

  std::size_t lag_count() const { return max_lag - min_lag + 1; }
};

struct LagResult {
  DataMatrix design;   // (n - max_lag) x (variables * L)
  DataMatrix targets;  // source columns at the aligned times t = max_lag+1..n
};

inline LagResult make_lags(const DataMatrix& series, const LagSpec& spec) {
  if (spec.min_lag < 1 || spec.max_lag < spec.min_lag) throw DomainError("lags must satisfy 1 <= min <= max");
  const std::size_t n = series.rows();
  if (n <= spec.max_lag)
    throw InsufficientLength("series of length " + std::to_string(n) + " is too short for lag " +
                             std::to_string(spec.max_lag));
  std::vector<std::size_t> vars = spec.variables;
  if (vars.empty())
    for (std::size_t j = 0; j < series.cols(); ++j) vars.push_back(j);
  const std::size_t rows = n - spec.max_lag;
  const std::size_t L = spec.lag_count();
  std::vector<double> design;
  design.reserve(rows * L * vars.size());
  std::vector<std::string> names;
  for (std::size_t v : vars) {
    if (v >= series.cols()) throw DomainError("lag variable out of range");
    auto col = series.column(v);
    for (std::size_t lag = spec.min_lag; lag <= spec.max_lag; ++lag) {
      // row r of the output is time t = max_lag + r; its lag-l value is t - l
      for (std::size_t r = 0; r < rows; ++r) design.push_back(col[spec.max_lag + r - lag]);
      names.push_back(series.name(v) + "_lag" + std::to_string(lag));
    }
  }
  std::vector<double> targets;
  targets.reserve(rows * series.cols());
  for (std::size_t j = 0; j < series.cols(); ++j) {
    auto col = series.column(j);
    targets.insert(targets.end(), col.begin() + static_cast<std::ptrdiff_t>(spec.max_lag), col.end());
  }
  return {DataMatrix(rows, L * vars.size(), std::move(design), std::move(names)),
          DataMatrix(rows, series.cols(), std::move(targets), series.names())};
}

// cos(pi j t) and sin(pi j t) for j = 1..j_max on t = (1..N)/N, interleaved
// cos1, sin1, cos2, sin2, ...
inline DataMatrix make_trig(std::size_t length, std::size_t j_max) {
  if (length < 2 || j_max < 1) throw DomainError("trigonometric dictionary needs N >= 2 and j_max >= 1");
  std::vector<double> values;
  values.reserve(length * 2 * j_max);
  std::vector<std::string> names;
  const double N = static_cast<double>(length);
  for (std::size_t j = 1; j <= j_max; ++j) {
    for (int kind = 0; kind < 2; ++kind) {
      for (std::size_t i = 1; i <= length; ++i) {
        const double arg = std::numbers::pi * static_cast<double>(j) * (static_cast<double>(i) / N);
        values.push_back(kind == 0 ? std::cos(arg) : std::sin(arg));
      }
      names.push_back((kind == 0 ? "cos" : "sin") + std::to_string(j));
    }
  }
  return DataMatrix(length, 2 * j_max, std::move(values), std::move(names));
}

struct InteractionSpec {
  std::size_t max_degree = 2;
  bool dedup = true;
  std::size_t column_budget = 5'000'000;
};

// Number of monomials of degree 1..d in q variables, C(q + d, d) - 1, or
// SIZE_MAX on overflow.
inline std::size_t monomial_count(std::size_t q, std::size_t d) {
  long double c = 1.0L;
  for (std::size_t i = 1; i <= d; ++i) c = c * static_cast<long double>(q + i) / static_cast<long double>(i);
  c = std::round(c) - 1.0L;
  if (c > static_cast<long double>(std::numeric_limits<std::size_t>::max() / 2))
    return std::numeric_limits<std::size_t>::max();
  return static_cast<std::size_t>(c);
}

// All monomials of degree 1..max_degree in the source columns, generated
// column by column on demand. Order is graded lexicographic: degree first,
// then the non-decreasing factor index tuples in lexicographic order. With
// dedup, a monomial whose values are bitwise identical to an earlier one
// (powers of a 0/1 column, for example) is dropped.
class InteractionColumns {
 public:
  InteractionColumns(DataMatrix source, const InteractionSpec& spec)
      : source_(std::move(source)), spec_(spec) {
    if (spec.max_degree < 1) throw DomainError("interaction degree must be at least 1");
    raw_count_ = monomial_count(source_.cols(), spec.max_degree);
    if (raw_count_ > spec.column_budget) throw ColumnBudgetExceeded(raw_count_, spec.column_budget);
    enumerate();
    if (spec.dedup) drop_duplicates();
  }

  std::size_t rows() const noexcept { return source_.rows(); }
  std::size_t cols() const noexcept { return offsets_.size() - 1; }
  std::size_t raw_count() const noexcept { return raw_count_; }
  std::size_t degree(std::size_t j) const { return offsets_[j + 1] - offsets_[j]; }
  std::span<const std::uint32_t> factors(std::size_t j) const {
    return {factors_.data() + offsets_[j], degree(j)};
  }

  std::span<const double> column(std::size_t j, std::vector<double>& scratch) const {
    evaluate(factors(j), scratch);
    return scratch;
  }

  // "x1*x3^2" with the source column names.
  std::string name(std::size_t j) const {
    std::string out;
    auto f = factors(j);
    for (std::size_t i = 0; i < f.size();) {
      std::size_t k = i;
      while (k < f.size() && f[k] == f[i]) ++k;
      if (!out.empty()) out += '*';
      out += source_.name(f[i]);
      if (k - i > 1) out += '^' + std::to_string(k - i);
      i = k;
    }
    return out;
  }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    out.reserve(cols());
    for (std::size_t j = 0; j < cols(); ++j) out.push_back(name(j));
    return out;
  }

  DataMatrix materialize() const {
    std::vector<double> values;
    values.reserve(rows() * cols());
    std::vector<double> scratch;
    for (std::size_t j = 0; j < cols(); ++j) {
      evaluate(factors(j), scratch);
      values.insert(values.end(), scratch.begin(), scratch.end());
    }
    return DataMatrix(rows(), cols(), std::move(values), names());
  }

 private:
  void evaluate(std::span<const std::uint32_t> f, std::vector<double>& out) const {
    auto first = source_.column(f[0]);
    out.assign(first.begin(), first.end());
    for (std::size_t k = 1; k < f.size(); ++k) {
      auto col = source_.column(f[k]);
      for (std::size_t i = 0; i < out.size(); ++i) out[i] *= col[i];
    }
  }

  void enumerate() {
    const auto q = static_cast<std::uint32_t>(source_.cols());
    offsets_.assign(1, 0);
    factors_.reserve(raw_count_ * spec_.max_degree / 2 + 1);
    std::vector<std::uint32_t> tuple;
    for (std::size_t d = 1; d <= spec_.max_degree && q > 0; ++d) {
      tuple.assign(d, 0);
      for (;;) {
        factors_.insert(factors_.end(), tuple.begin(), tuple.end());
        offsets_.push_back(factors_.size());
        // next non-decreasing tuple in lexicographic order
        std::size_t pos = d;
        while (pos > 0 && tuple[pos - 1] == q - 1) --pos;
        if (pos == 0) break;
        const std::uint32_t v = tuple[pos - 1] + 1;
        for (std::size_t i = pos - 1; i < d; ++i) tuple[i] = v;
      }
    }
  }

  static std::uint64_t hash_column(std::span<const double> v) {
    std::uint64_t h = 1469598103934665603ull;
    for (double x : v) {
      std::uint64_t bits;
      std::memcpy(&bits, &x, sizeof bits);
      for (int b = 0; b < 8; ++b) {
        h ^= (bits >> (8 * b)) & 0xffu;
        h *= 1099511628211ull;
      }
    }
    return h;
  }

  void drop_duplicates() {
    std::unordered_map<std::uint64_t, std::vector<std::size_t>> kept_by_hash;
    std::vector<std::uint32_t> factors;
    std::vector<std::size_t> offsets{0};
    std::vector<double> col, other;
    for (std::size_t j = 0; j < cols(); ++j) {
      evaluate(factors_span(j), col);
      auto& bucket = kept_by_hash[hash_column(col)];
      bool duplicate = false;
      for (std::size_t kept : bucket) {
        evaluate({factors.data() + offsets[kept], offsets[kept + 1] - offsets[kept]}, other);
        if (std::memcmp(col.data(), other.data(), col.size() * sizeof(double)) == 0) {
          duplicate = true;
          break;
        }
      }
      if (duplicate) continue;
      bucket.push_back(offsets.size() - 1);
      auto f = factors_span(j);
      factors.insert(factors.end(), f.begin(), f.end());
      offsets.push_back(factors.size());
    }
    factors_ = std::move(factors);
    offsets_ = std::move(offsets);
  }

  std::span<const std::uint32_t> factors_span(std::size_t j) const {
    return {factors_.data() + offsets_[j], offsets_[j + 1] - offsets_[j]};
  }

  DataMatrix source_;
  InteractionSpec spec_;
  std::size_t raw_count_ = 0;
  std::vector<std::uint32_t> factors_;
  std::vector<std::size_t> offsets_;
};

inline InteractionColumns make_interactions(const DataMatrix& m, const InteractionSpec& spec) {
  return InteractionColumns(m, spec);
}

}  // namespace gausscov
