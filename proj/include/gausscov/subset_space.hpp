#pragma once

#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "gausscov/data_matrix.hpp"
#include "gausscov/residual_state.hpp"

namespace gausscov {

// A small set of p columns and the response, expressed in an orthonormal
// basis of span(intercept, columns) with the intercept direction removed.
// Every least-squares question about subsets of those columns (intercept
// always included) can then be answered in dim <= p coordinates:
//   rss(S) = base_rss + || response - P_S response ||^2.
struct SubsetSpace {
  std::size_t dim = 0;
  std::vector<std::vector<double>> columns;
  std::vector<double> response;
  double base_rss = 0.0;
};

template <ColumnSource M>
SubsetSpace project_subset_space(const M& m, std::span<const double> y,
                                 std::span<const std::size_t> cols, bool intercept) {
  const std::size_t n = y.size();
  std::vector<std::vector<double>> basis;
  if (intercept) basis.emplace_back(n, 1.0 / std::sqrt(static_cast<double>(n)));
  const std::size_t skip = basis.size();
  std::vector<std::vector<double>> raw_coords;
  std::vector<double> scratch;
  for (std::size_t j : cols) {
    auto col = m.column(j, scratch);
    std::vector<double> v(col.begin(), col.end());
    const double norm2 = detail::dot(v, v);
    std::vector<double> coords(basis.size(), 0.0);
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t b = 0; b < basis.size(); ++b) {
        const double t = detail::dot(basis[b], v);
        detail::axpy(-t, basis[b], v);
        coords[b] += t;
      }
    }
    const double rem2 = detail::dot(v, v);
    if (norm2 > 0.0 && rem2 > kCollinearTolerance * norm2) {
      const double rem = std::sqrt(rem2);
      for (double& x : v) x /= rem;
      basis.push_back(std::move(v));
      coords.push_back(rem);
    }
    raw_coords.push_back(std::move(coords));
  }
  SubsetSpace space;
  space.dim = basis.size() - skip;
  std::vector<double> r(y.begin(), y.end());
  space.response.assign(space.dim, 0.0);
  for (std::size_t b = 0; b < basis.size(); ++b) {
    const double t = detail::dot(basis[b], r);
    detail::axpy(-t, basis[b], r);
    if (b >= skip) space.response[b - skip] = t;
  }
  // second sweep keeps the residual orthogonal to the basis
  for (std::size_t b = 0; b < basis.size(); ++b) {
    const double t = detail::dot(basis[b], r);
    detail::axpy(-t, basis[b], r);
    if (b >= skip) space.response[b - skip] += t;
  }
  space.base_rss = detail::dot(r, r);
  for (auto& c : raw_coords) {
    std::vector<double> out(space.dim, 0.0);
    for (std::size_t b = skip; b < c.size(); ++b) out[b - skip] = c[b];
    space.columns.push_back(std::move(out));
  }
  return space;
}

// rss of every subset of the space's columns, indexed by bit mask. Subsets
// larger than `max_size` are left as NaN. Columns that add nothing to a
// subset's span leave its rss unchanged.
inline std::vector<double> subset_rss_table(const SubsetSpace& space, std::size_t max_size) {
  const std::size_t p = space.columns.size();
  if (p > 30) throw DomainError("subset table limited to 30 columns");
  const std::size_t dim = space.dim;
  std::vector<double> rss(std::size_t{1} << p, std::numeric_limits<double>::quiet_NaN());
  auto sq = [](std::span<const double> v) { return detail::dot(v, v); };
  rss[0] = space.base_rss + sq(space.response);

  // basis[d] and residual[d] describe the subset on the current DFS path of
  // depth d.
  std::vector<std::vector<double>> basis(p + 1, std::vector<double>(dim, 0.0));
  std::vector<std::vector<double>> residual(p + 1, std::vector<double>(dim, 0.0));
  residual[0] = space.response;
  std::vector<double> v(dim);

  struct Frame {
    std::uint32_t mask;
    std::size_t next;
    std::size_t depth;
  };
  std::vector<Frame> stack;
  stack.push_back({0u, 0, 0});
  while (!stack.empty()) {
    Frame& f = stack.back();
    if (f.next >= p || f.depth >= max_size) {
      stack.pop_back();
      continue;
    }
    const std::size_t j = f.next++;
    const std::size_t d = f.depth;
    const std::uint32_t mask = f.mask | (std::uint32_t{1} << j);
    v = space.columns[j];
    const double norm2 = sq(v);
    for (int pass = 0; pass < 2; ++pass)
      for (std::size_t b = 0; b < d; ++b) detail::axpy(-detail::dot(basis[b], v), basis[b], v);
    const double rem2 = sq(v);
    residual[d + 1] = residual[d];
    if (norm2 > 0.0 && rem2 > kCollinearTolerance * norm2) {
      const double rem = std::sqrt(rem2);
      for (std::size_t i = 0; i < dim; ++i) basis[d][i] = v[i] / rem;
      detail::axpy(-detail::dot(basis[d], residual[d + 1]), basis[d], residual[d + 1]);
    } else {
      std::fill(basis[d].begin(), basis[d].end(), 0.0);
    }
    rss[mask] = space.base_rss + sq(residual[d + 1]);
    stack.push_back({mask, j + 1, d + 1});
  }
  return rss;
}

}  // namespace gausscov
