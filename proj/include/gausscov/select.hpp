#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gausscov/data_matrix.hpp"
#include "gausscov/error.hpp"
#include "gausscov/parallel.hpp"
#include "gausscov/pvalue.hpp"
#include "gausscov/residual_state.hpp"
#include "gausscov/subset_space.hpp"

namespace gausscov {

// How f3st builds the exclusion set of a branch.
enum class ExclusionMode {
  accumulate,  // exclude the branch covariate and everything excluded by its ancestors
  strict,      // exclude only the branch covariate
};

struct SelectionConfig {
  double p0 = 0.01;
  std::size_t kmn = 0;
  std::size_t max_subset_refine = 20;
  bool intercept = true;
  std::size_t m = 1;
  std::size_t all_subset_max_q = 25;
  ExclusionMode f3st_exclusion = ExclusionMode::accumulate;
  // Worker threads; 0 resolves to the hardware count capped by GAUSSCOV_THREADS.
  std::size_t threads = 1;

  void validate() const {
    if (!(p0 > 0.0 && p0 < 1.0)) throw DomainError("p0 must lie in (0, 1)");
    if (m < 1) throw DomainError("m must be at least 1");
    if (all_subset_max_q > 25) throw DomainError("all-subset cap cannot exceed 25");
    if (max_subset_refine > 25) throw DomainError("refinement cap cannot exceed 25");
  }
};

struct StepRecord {
  std::size_t column = 0;
  double pf = 1.0;
  double pg = 1.0;
  double rss = 0.0;  // after the column joined
  bool forced = false;
};

struct SelectionResult {
  std::vector<std::size_t> selected;  // 0-based column indices
  std::vector<double> pg;
  std::vector<char> forced;           // added under the kmn floor and not refined away
  std::vector<double> coefficients;   // aligned with `selected`
  double intercept = 0.0;             // coefficient of x0, 0 without intercept
  double intercept_pg = std::numeric_limits<double>::quiet_NaN();
  double rss = 0.0;
  bool refined = false;
  std::vector<StepRecord> trace;

  bool empty() const noexcept { return selected.empty(); }
  std::vector<std::size_t> sorted_set() const {
    std::vector<std::size_t> s(selected);
    std::sort(s.begin(), s.end());
    return s;
  }
};

struct ApproximationSet {
  std::vector<SelectionResult> results;  // rss ascending
  std::vector<std::string> provenance;   // one entry per result
  std::size_t size() const noexcept { return results.size(); }
};

namespace detail {

inline double sum_squares(std::span<const double> v) { return dot(v, v); }

// Below this fraction of ||y||^2 the fit is exact up to rounding and no
// further ratio is meaningful.
inline constexpr double kPerfectFit = 1e-24;

inline std::vector<char> exclusion_mask(std::size_t q, std::span<const char> excluded) {
  if (excluded.empty()) return std::vector<char>(q, 0);
  if (excluded.size() != q) throw DomainError("exclusion mask has wrong length");
  return {excluded.begin(), excluded.end()};
}

// P_F of a subset member from the rss of the subset with and without it.
inline double member_pf(std::size_t n, std::size_t fit_dim, double rss_with, double rss_without,
                        double floor) {
  if (rss_without <= floor) return 1.0;
  const PvalueContext ctx{n, fit_dim, 1};
  return pf_from_rss_ratio(ctx, std::min(rss_with, rss_without), rss_without).p;
}

// rss of every subset of a small column set, and whether each subset passes
// the all-subset rule (every member has P_G < p0).
struct SubsetScan {
  std::vector<double> rss;       // by mask
  std::vector<char> retained;    // by mask
  std::size_t q_total = 0;
  std::size_t n = 0;
  bool intercept = false;
  double floor = 0.0;

  std::size_t fit_dim(std::uint32_t mask) const {
    return static_cast<std::size_t>(std::popcount(mask)) + (intercept ? 1 : 0);
  }

  std::vector<double> member_pg(std::uint32_t mask) const {
    std::vector<double> out;
    const std::size_t s = static_cast<std::size_t>(std::popcount(mask));
    for (std::uint32_t bits = mask; bits != 0; bits &= bits - 1) {
      const std::uint32_t bit = bits & (~bits + 1);
      const double pf = member_pf(n, fit_dim(mask), rss[mask], rss[mask ^ bit], floor);
      out.push_back(pg_all_subset(PvalueContext::for_subset(n, fit_dim(mask), q_total, s), pf));
    }
    return out;
  }
};

// Evaluates every subset of `space` against the all-subset rule with q_total
// Gaussian competitors in the pool.
inline SubsetScan scan_subsets(const SubsetSpace& space, std::size_t n, std::size_t q_total,
                               bool intercept, double p0, double y_norm2) {
  const std::size_t p = space.columns.size();
  SubsetScan out;
  out.q_total = q_total;
  out.n = n;
  out.intercept = intercept;
  out.floor = kPerfectFit * y_norm2;
  const std::size_t base_dim = intercept ? 1 : 0;
  // largest subset with n - fit_dim >= 2
  const std::size_t max_size =
      n >= base_dim + 3 ? std::min(p, n - base_dim - 2) : std::size_t{0};
  out.rss = subset_rss_table(space, max_size);
  out.retained.assign(out.rss.size(), 0);

  // Per size: P_F threshold and the matching rss-ratio threshold.
  std::vector<double> pf_crit(max_size + 1, 0.0), ratio_crit(max_size + 1, 0.0);
  for (std::size_t s = 1; s <= max_size; ++s) {
    if (s > q_total) break;
    pf_crit[s] = pf_threshold(p0, q_total - s + 1);
    ratio_crit[s] =
        beta_quantile(static_cast<double>(n - s - base_dim) / 2.0, 0.5, pf_crit[s]);
  }
  for (std::uint32_t mask = 1; mask < out.rss.size(); ++mask) {
    const std::size_t s = static_cast<std::size_t>(std::popcount(mask));
    if (s > max_size || s > q_total) continue;
    bool ok = true;
    for (std::uint32_t bits = mask; bits != 0 && ok; bits &= bits - 1) {
      const std::uint32_t bit = bits & (~bits + 1);
      const double without = out.rss[mask ^ bit];
      const double with = std::min(out.rss[mask], without);
      if (without <= out.floor) {
        ok = false;
        break;
      }
      const double ratio = with / without;
      const double crit = ratio_crit[s];
      if (std::fabs(ratio - crit) <= 1e-9 * crit) {
        const double pf = member_pf(n, s + base_dim, with, without, out.floor);
        ok = pg_all_subset(PvalueContext::for_subset(n, s + base_dim, q_total, s), pf) < p0;
      } else {
        ok = ratio < crit;
      }
    }
    out.retained[mask] = ok ? 1 : 0;
  }
  return out;
}

inline bool better_subset(double rss_a, std::uint32_t a, double rss_b, std::uint32_t b) {
  if (rss_a != rss_b) return rss_a < rss_b;
  const int pa = std::popcount(a), pb = std::popcount(b);
  if (pa != pb) return pa < pb;
  // lexicographic on ascending member indices
  for (std::uint32_t x = a, y = b; x != 0 || y != 0; x &= x - 1, y &= y - 1) {
    const int ia = x ? std::countr_zero(x) : 64;
    const int ib = y ? std::countr_zero(y) : 64;
    if (ia != ib) return ia < ib;
  }
  return false;
}

template <ColumnSource M>
void finish_result(SelectionResult& r, const M& m, std::span<const double> y, bool intercept) {
  const std::size_t n = y.size();
  FitResult fit = fit_subset(m, y, r.selected, intercept);
  r.rss = fit.rss;
  const std::size_t offset = intercept ? 1 : 0;
  r.coefficients.assign(fit.coefficients.begin() + static_cast<std::ptrdiff_t>(offset),
                        fit.coefficients.end());
  r.intercept = intercept ? fit.coefficients.front() : 0.0;
  if (!intercept || n < fit.dim + 2) return;
  // x0 is reported with its plain F P-value
  double without = 0.0;
  try {
    without = fit_subset(m, y, r.selected, false).rss;
  } catch (const CollinearColumn&) {
    return;
  }
  const double floor = kPerfectFit * sum_squares(y);
  r.intercept_pg = member_pf(n, fit.dim, fit.rss, without, floor);
}

template <ColumnSource M>
std::size_t candidate_count(const M& m, std::span<const char> mask) {
  std::size_t c = 0;
  for (std::size_t j = 0; j < m.cols(); ++j) c += mask[j] ? 0 : 1;
  return c;
}

}  // namespace detail

// Gaussian stepwise selection. Greedy forward selection while the best
// candidate's stepwise P_G is below p0 (or fewer than kmn covariates are in),
// then, when the selected set has at most max_subset_refine members, the
// least-squares-best subset of it whose every member passes the all-subset
// P_G test. Columns flagged in `excluded` are not candidates and do not count
// towards the Gaussian competitors.
template <ColumnSource M>
SelectionResult f1st(const M& m, std::span<const double> y, const SelectionConfig& cfg,
                     std::span<const char> excluded = {}) {
  cfg.validate();
  const std::size_t n = m.rows();
  if (y.size() != n) throw DomainError("response length does not match the matrix");
  if (n < 3) throw DomainError("need at least 3 observations");
  std::vector<char> mask = detail::exclusion_mask(m.cols(), excluded);
  const std::size_t q_pool = detail::candidate_count(m, mask);
  const std::size_t threads = resolve_threads(cfg.threads);
  const double y_norm2 = detail::sum_squares(y);
  const double floor = detail::kPerfectFit * y_norm2;

  ResidualState state = make_state(y, cfg.intercept);
  SelectionResult out;
  while (state.k() < q_pool) {
    const std::size_t fit_dim = state.dim() + 1;
    if (fit_dim + 2 > n || state.rss <= floor) break;
    ScanResult best;
    try {
      best = scan_best(state, m, mask, threads);
    } catch (const NoCandidates&) {
      break;
    }
    const auto ctx = PvalueContext::for_step(n, fit_dim, q_pool, state.k());
    const double pf = pf_from_rss_ratio(ctx, std::min(best.rss_candidate, state.rss), state.rss).p;
    const double pg = pg_stepwise(ctx, pf);
    const bool forced = state.k() < cfg.kmn;
    if (!forced && !(pg < cfg.p0)) break;
    try {
      extend_in_place(state, m, best.column);
    } catch (const CollinearColumn&) {
      mask[best.column] = 1;
      continue;
    }
    out.trace.push_back({best.column, pf, pg, state.rss, forced});
  }

  const std::vector<std::size_t>& path = state.selected;
  if (!path.empty() && path.size() <= cfg.max_subset_refine) {
    const SubsetSpace space = project_subset_space(m, y, path, cfg.intercept);
    const auto scan = detail::scan_subsets(space, n, q_pool, cfg.intercept, cfg.p0, y_norm2);
    std::uint32_t chosen = 0;
    for (std::uint32_t s = 1; s < scan.rss.size(); ++s) {
      if (!scan.retained[s]) continue;
      if (chosen == 0 || detail::better_subset(scan.rss[s], s, scan.rss[chosen], chosen)) chosen = s;
    }
    out.refined = true;
    if (chosen != 0) {
      const auto pgs = scan.member_pg(chosen);
      // member_pg walks bits in ascending order; map back to path order
      std::vector<double> by_bit(path.size(), 1.0);
      std::size_t idx = 0;
      for (std::uint32_t bits = chosen; bits != 0; bits &= bits - 1)
        by_bit[static_cast<std::size_t>(std::countr_zero(bits))] = pgs[idx++];
      for (std::size_t t = 0; t < path.size(); ++t) {
        if (!(chosen >> t & 1u)) continue;
        out.selected.push_back(path[t]);
        out.pg.push_back(by_bit[t]);
        out.forced.push_back(0);
      }
    }
  } else {
    for (const StepRecord& rec : out.trace) {
      out.selected.push_back(rec.column);
      out.pg.push_back(rec.pg);
      out.forced.push_back(rec.forced ? 1 : 0);
    }
  }
  detail::finish_result(out, m, y, cfg.intercept);
  return out;
}

namespace detail {

inline void order_by_rss(ApproximationSet& set) {
  std::vector<std::size_t> idx(set.results.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    const auto& ra = set.results[a];
    const auto& rb = set.results[b];
    if (ra.rss != rb.rss) return ra.rss < rb.rss;
    if (ra.selected.size() != rb.selected.size()) return ra.selected.size() < rb.selected.size();
    return ra.sorted_set() < rb.sorted_set();
  });
  ApproximationSet out;
  for (std::size_t i : idx) {
    out.results.push_back(std::move(set.results[i]));
    out.provenance.push_back(std::move(set.provenance[i]));
  }
  set = std::move(out);
}

inline std::string index_list(const std::vector<std::size_t>& cols) {
  std::string s = "{";
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(cols[i] + 1);
  }
  return s + "}";
}

}  // namespace detail

// Exhaustive all-subset selection for small q: every subset whose members all
// have P_G < p0, keeping only those not contained in another retained subset,
// ordered by rss.
template <ColumnSource M>
ApproximationSet all_subset_select(const M& m, std::span<const double> y, const SelectionConfig& cfg) {
  cfg.validate();
  const std::size_t q = m.cols();
  const std::size_t n = m.rows();
  if (q > cfg.all_subset_max_q) throw TooManyColumns(q, cfg.all_subset_max_q);
  if (y.size() != n) throw DomainError("response length does not match the matrix");
  if (n < 3) throw DomainError("need at least 3 observations");
  std::vector<std::size_t> all(q);
  for (std::size_t j = 0; j < q; ++j) all[j] = j;
  const SubsetSpace space = project_subset_space(m, y, all, cfg.intercept);
  const auto scan =
      detail::scan_subsets(space, n, q, cfg.intercept, cfg.p0, detail::sum_squares(y));

  // has_retained_superset[mask]: mask or some superset of it is retained
  const std::size_t total = scan.rss.size();
  std::vector<char> up(scan.retained);
  for (std::size_t b = 0; b < q; ++b)
    for (std::size_t mask = 0; mask < total; ++mask)
      if (!(mask >> b & 1u)) up[mask] |= up[mask | (std::size_t{1} << b)];

  ApproximationSet out;
  for (std::size_t mask = 1; mask < total; ++mask) {
    if (!scan.retained[mask]) continue;
    bool maximal = true;
    for (std::size_t b = 0; b < q && maximal; ++b)
      if (!(mask >> b & 1u) && up[mask | (std::size_t{1} << b)]) maximal = false;
    if (!maximal) continue;
    SelectionResult r;
    for (std::size_t b = 0; b < q; ++b)
      if (mask >> b & 1u) r.selected.push_back(b);
    r.pg = scan.member_pg(static_cast<std::uint32_t>(mask));
    r.forced.assign(r.selected.size(), 0);
    detail::finish_result(r, m, y, cfg.intercept);
    out.provenance.push_back("all-subset");
    out.results.push_back(std::move(r));
  }
  detail::order_by_rss(out);
  return out;
}

// Repeated f1st, each round excluding every covariate selected so far, until
// a round selects nothing.
template <ColumnSource M>
ApproximationSet f2st(const M& m, std::span<const double> y, const SelectionConfig& cfg,
                      std::span<const char> excluded = {}) {
  std::vector<char> mask = detail::exclusion_mask(m.cols(), excluded);
  ApproximationSet out;
  for (std::size_t round = 1;; ++round) {
    SelectionResult r = f1st(m, y, cfg, mask);
    if (r.empty()) break;
    for (std::size_t c : r.selected) mask[c] = 1;
    out.provenance.push_back("f2st round " + std::to_string(round));
    out.results.push_back(std::move(r));
  }
  detail::order_by_rss(out);
  return out;
}

// Branching exclusion search. The root is f1st on all candidates; each
// selected covariate of a new approximation is excluded in turn and f1st is
// rerun, to depth m. Approximations with an already seen covariate set are
// dropped and not expanded.
template <ColumnSource M>
ApproximationSet f3st(const M& m, std::span<const double> y, const SelectionConfig& cfg,
                      std::span<const char> excluded = {}) {
  cfg.validate();
  const std::vector<char> base = detail::exclusion_mask(m.cols(), excluded);
  const std::size_t threads = resolve_threads(cfg.threads);
  SelectionConfig inner = cfg;
  inner.threads = 1;

  ApproximationSet out;
  std::set<std::vector<std::size_t>> seen_sets;
  std::set<std::vector<std::size_t>> seen_exclusions;

  struct Node {
    std::vector<std::size_t> selected;
    std::vector<std::size_t> exclusion;  // sorted
  };
  SelectionResult root = f1st(m, y, cfg, base);
  if (root.empty()) return out;
  seen_sets.insert(root.sorted_set());
  seen_exclusions.insert({});
  std::vector<Node> frontier{{root.selected, {}}};
  out.provenance.push_back("f3st root");
  out.results.push_back(std::move(root));

  for (std::size_t depth = 1; depth <= cfg.m && !frontier.empty(); ++depth) {
    std::vector<std::vector<std::size_t>> tasks;
    for (const Node& node : frontier) {
      for (std::size_t c : node.selected) {
        std::vector<std::size_t> ex;
        if (cfg.f3st_exclusion == ExclusionMode::accumulate) ex = node.exclusion;
        ex.push_back(c);
        std::sort(ex.begin(), ex.end());
        ex.erase(std::unique(ex.begin(), ex.end()), ex.end());
        if (seen_exclusions.insert(ex).second) tasks.push_back(std::move(ex));
      }
    }
    std::vector<SelectionResult> results(tasks.size());
    parallel_blocks(0, tasks.size(), threads, 1, [&](std::size_t lo, std::size_t hi, std::size_t) {
      for (std::size_t t = lo; t < hi; ++t) {
        std::vector<char> mask(base);
        for (std::size_t c : tasks[t]) mask[c] = 1;
        results[t] = f1st(m, y, inner, mask);
      }
    });
    std::vector<Node> next;
    for (std::size_t t = 0; t < tasks.size(); ++t) {
      SelectionResult& r = results[t];
      if (r.empty() || !seen_sets.insert(r.sorted_set()).second) continue;
      next.push_back({r.selected, tasks[t]});
      out.provenance.push_back("f3st exclude " + detail::index_list(tasks[t]));
      out.results.push_back(std::move(r));
    }
    frontier = std::move(next);
  }
  detail::order_by_rss(out);
  return out;
}

}  // namespace gausscov
