#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "gausscov/data_matrix.hpp"
#include "gausscov/error.hpp"
#include "gausscov/parallel.hpp"

namespace gausscov {

// A column whose squared remainder after projection falls below this
// fraction of its squared norm is treated as lying in the current span.
inline constexpr double kCollinearTolerance = 1e-12;

namespace detail {

inline double dot(std::span<const double> a, std::span<const double> b) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) noexcept {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += alpha * x[i];
}

}  // namespace detail

// Current least-squares fit of a response on an ordered set of columns.
//
// The fit is kept as an orthonormal basis Q (intercept first when present),
// the coordinates R of every fitted column in Q, the coordinates Q'y of the
// response and the residual y - QQ'y. Adding a column costs O(nk); scanning
// all candidates costs O(nq) using cached squared norms of each column's
// remainder against Q.
struct ResidualState {
  std::size_t n = 0;
  bool intercept = false;
  std::vector<std::size_t> selected;
  std::vector<double> residual;
  double rss = 0.0;
  std::vector<std::vector<double>> basis;
  // r_columns[t] holds the coordinates of the t-th fitted column (intercept
  // included) in basis[0..t].
  std::vector<std::vector<double>> r_columns;
  std::vector<double> y_coords;

  // Scan cache, built on first scan. perp_norm2[j] is ||x_j||^2 minus the
  // squared coordinates of x_j on basis[0..cache_depth).
  std::vector<double> col_norm2;
  std::vector<double> perp_norm2;
  std::vector<char> in_model;
  std::size_t cache_depth = 0;

  std::size_t k() const noexcept { return selected.size(); }
  std::size_t dim() const noexcept { return basis.size(); }
};

// Empty fit (or intercept-only fit) of `y`.
inline ResidualState make_state(std::span<const double> y, bool intercept) {
  ResidualState s;
  s.n = y.size();
  s.intercept = intercept;
  s.residual.assign(y.begin(), y.end());
  for (double v : y)
    if (!std::isfinite(v)) throw DomainError("response contains a non-finite value");
  if (intercept && s.n > 0) {
    const double root_n = std::sqrt(static_cast<double>(s.n));
    std::vector<double> q0(s.n, 1.0 / root_n);
    const double proj = detail::dot(q0, s.residual);
    detail::axpy(-proj, q0, s.residual);
    s.basis.push_back(std::move(q0));
    s.r_columns.push_back({root_n});
    s.y_coords.push_back(proj);
  }
  s.rss = detail::dot(s.residual, s.residual);
  return s;
}

// Appends column j in place. Modified Gram-Schmidt with one
// reorthogonalization pass.
template <ColumnSource M>
void extend_in_place(ResidualState& state, const M& m, std::size_t j) {
  if (j >= m.cols()) throw DomainError("column index out of range");
  for (std::size_t s : state.selected)
    if (s == j) throw DomainError("column " + std::to_string(j + 1) + " is already selected");
  std::vector<double> scratch;
  auto col = m.column(j, scratch);
  std::vector<double> v(col.begin(), col.end());
  const double norm2 = detail::dot(v, v);
  std::vector<double> coords(state.dim() + 1, 0.0);
  for (int pass = 0; pass < 2; ++pass) {
    for (std::size_t b = 0; b < state.dim(); ++b) {
      const double t = detail::dot(state.basis[b], v);
      detail::axpy(-t, state.basis[b], v);
      coords[b] += t;
    }
  }
  const double rem2 = detail::dot(v, v);
  if (!(norm2 > 0.0) || rem2 <= kCollinearTolerance * norm2) throw CollinearColumn(j);
  const double rem = std::sqrt(rem2);
  for (double& x : v) x /= rem;
  coords.back() = rem;
  const double proj = detail::dot(v, state.residual);
  detail::axpy(-proj, v, state.residual);
  state.rss = detail::dot(state.residual, state.residual);
  state.basis.push_back(std::move(v));
  state.r_columns.push_back(std::move(coords));
  state.y_coords.push_back(proj);
  state.selected.push_back(j);
  if (!state.in_model.empty()) state.in_model[j] = 1;
}

template <ColumnSource M>
ResidualState extend(ResidualState state, const M& m, std::size_t j) {
  extend_in_place(state, m, j);
  return state;
}

struct ScanResult {
  std::size_t column = 0;
  double rss_candidate = 0.0;
};

// Best column to add next: the one with the largest rss reduction
// (x_j'r)^2 / ||x_j - QQ'x_j||^2, smallest index on ties. `excluded` is
// either empty or has one flag per column.
template <ColumnSource M>
ScanResult scan_best(ResidualState& state, const M& m, std::span<const char> excluded = {},
                     std::size_t threads = 1) {
  const std::size_t q = m.cols();
  if (m.rows() != state.n) throw DomainError("matrix and response have different row counts");
  if (!excluded.empty() && excluded.size() != q) throw DomainError("exclusion mask has wrong length");
  const bool fresh = state.col_norm2.size() != q;
  if (fresh) {
    state.col_norm2.assign(q, 0.0);
    state.perp_norm2.assign(q, 0.0);
    state.in_model.assign(q, 0);
    for (std::size_t s : state.selected) state.in_model[s] = 1;
    state.cache_depth = 0;
  }
  const std::size_t depth_from = state.cache_depth;
  const std::size_t depth_to = state.dim();
  const std::size_t min_block = std::max<std::size_t>(64, 400000 / std::max<std::size_t>(1, state.n));
  const std::size_t blocks = block_count(q, threads, min_block);
  struct Best {
    std::size_t column = std::numeric_limits<std::size_t>::max();
    double reduction = -1.0;
  };
  std::vector<Best> best(std::max<std::size_t>(1, blocks));

  parallel_blocks(0, q, threads, min_block, [&](std::size_t lo, std::size_t hi, std::size_t b) {
    std::vector<double> scratch;
    Best local;
    for (std::size_t j = lo; j < hi; ++j) {
      if (state.in_model[j]) continue;
      const bool skip = !excluded.empty() && excluded[j];
      if (skip && !fresh && depth_from == depth_to) continue;
      auto col = m.column(j, scratch);
      if (fresh) {
        state.col_norm2[j] = detail::dot(col, col);
        state.perp_norm2[j] = state.col_norm2[j];
      }
      for (std::size_t d = depth_from; d < depth_to; ++d) {
        const double t = detail::dot(state.basis[d], col);
        state.perp_norm2[j] -= t * t;
      }
      if (state.perp_norm2[j] < 0.0) state.perp_norm2[j] = 0.0;
      if (skip) continue;
      const double norm2 = state.col_norm2[j];
      const double perp = state.perp_norm2[j];
      if (!(norm2 > 0.0) || perp <= kCollinearTolerance * norm2) continue;
      const double t = detail::dot(col, state.residual);
      const double reduction = t * t / perp;
      if (reduction > local.reduction) local = {j, reduction};
    }
    best[b] = local;
  });
  state.cache_depth = depth_to;

  Best winner;
  for (const Best& b : best)
    if (b.reduction > winner.reduction) winner = b;
  if (winner.column == std::numeric_limits<std::size_t>::max()) throw NoCandidates();
  return {winner.column, std::max(0.0, state.rss - winner.reduction)};
}

// Coefficients of the fitted columns in the order they were added
// (intercept first when present), from R beta = Q'y.
inline std::vector<double> coefficients(const ResidualState& state) {
  const std::size_t d = state.dim();
  std::vector<double> beta(state.y_coords);
  for (std::size_t t = d; t-- > 0;) {
    beta[t] /= state.r_columns[t][t];
    for (std::size_t i = 0; i < t; ++i) beta[i] -= state.r_columns[t][i] * beta[t];
  }
  return beta;
}

struct FitResult {
  std::vector<double> coefficients;  // intercept first when fitted
  double rss = 0.0;
  std::size_t dim = 0;
};

// Least-squares fit of y on `columns` (plus intercept). Throws
// CollinearColumn when a column adds nothing to the span.
template <ColumnSource M>
FitResult fit_subset(const M& m, std::span<const double> y, std::span<const std::size_t> columns,
                     bool intercept) {
  ResidualState s = make_state(y, intercept);
  for (std::size_t j : columns) extend_in_place(s, m, j);
  return {coefficients(s), s.rss, s.dim()};
}

}  // namespace gausscov
