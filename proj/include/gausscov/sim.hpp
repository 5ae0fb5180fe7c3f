#pragma once

#include <algorithm>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <iomanip>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "gausscov/data_matrix.hpp"
#include "gausscov/error.hpp"
#include "gausscov/parallel.hpp"
#include "gausscov/rng.hpp"
#include "gausscov/select.hpp"

namespace gausscov {

enum class SimMethod { f1st, f3st };

struct SimSpec {
  // Synthetic i.i.d. N(0,1) design of size n x q unless `design` is set.
  std::size_t n = 71;
  std::size_t q = 4088;
  std::shared_ptr<const DataMatrix> design;
  std::size_t active_size = 4;
  double beta = 20.0;
  double sigma = 1.0;
  std::size_t reps = 100;
  std::uint64_t seed = 20240101;
  SimMethod method = SimMethod::f1st;
  SelectionConfig cfg;  // cfg.m is the f3st depth
  std::size_t threads = 1;  // across replications

  void validate() const {
    const std::size_t rows = design ? design->rows() : n;
    const std::size_t cols = design ? design->cols() : q;
    if (reps < 1) throw DomainError("reps must be at least 1");
    if (active_size >= rows) throw DomainError("active set must be smaller than n");
    if (active_size > cols) throw DomainError("active set larger than the number of covariates");
    cfg.validate();
  }
};

struct SelectionScore {
  std::size_t fp = 0;
  std::size_t fn = 0;
  bool exact = true;
};

inline SelectionScore score_selection(const std::vector<std::size_t>& truth,
                                      const std::vector<std::size_t>& selected) {
  const std::set<std::size_t> t(truth.begin(), truth.end());
  const std::set<std::size_t> s(selected.begin(), selected.end());
  SelectionScore out;
  for (std::size_t i : s) out.fp += t.count(i) ? 0 : 1;
  for (std::size_t i : t) out.fn += s.count(i) ? 0 : 1;
  out.exact = out.fp == 0 && out.fn == 0;
  return out;
}

struct SimRecord {
  std::vector<std::size_t> truth;     // sorted
  std::vector<std::size_t> selected;  // sorted
  std::size_t fp = 0;
  std::size_t fn = 0;
  bool exact = false;
  double time_seconds = 0.0;
  std::string error;  // non-empty when the selection threw
};

struct SimReport {
  double fp_mean = 0.0;
  double fn_mean = 0.0;
  double pct_correct = 0.0;
  double mean_time_seconds = 0.0;
  std::size_t failures = 0;
  std::vector<SimRecord> records;
};

namespace detail {

inline DataMatrix gaussian_design(std::size_t n, std::size_t q, std::uint64_t seed) {
  std::vector<double> values(n * q);
  // one stream per column so the design does not depend on n for a fixed column
  for (std::size_t j = 0; j < q; ++j) {
    Rng rng(seed, (std::uint64_t{1} << 40) + j);
    for (std::size_t i = 0; i < n; ++i) values[j * n + i] = rng.normal();
  }
  return DataMatrix(n, q, std::move(values));
}

}  // namespace detail

// Replications of y = beta * (sum of a random active set of columns) +
// sigma * noise on a standardized design. With beta = 0 the truth is empty.
// Only the selection call is timed; a replication whose selection throws is
// recorded with its message and left out of the averages.
inline SimReport run_sim(const SimSpec& spec) {
  spec.validate();
  const DataMatrix raw =
      spec.design ? *spec.design : detail::gaussian_design(spec.n, spec.q, spec.seed);
  const DataMatrix x = standardize(raw).matrix;
  const std::size_t n = x.rows(), q = x.cols();
  SelectionConfig cfg = spec.cfg;
  cfg.threads = 1;

  std::vector<SimRecord> records(spec.reps);
  parallel_blocks(0, spec.reps, resolve_threads(spec.threads), 1,
                  [&](std::size_t lo, std::size_t hi, std::size_t) {
    for (std::size_t r = lo; r < hi; ++r) {
      Rng rng(spec.seed, r + 1);
      std::vector<std::size_t> active = rng.sample(q, spec.active_size);
      std::vector<double> y(n, 0.0);
      for (std::size_t c : active) {
        auto col = x.column(c);
        for (std::size_t i = 0; i < n; ++i) y[i] += spec.beta * col[i];
      }
      for (std::size_t i = 0; i < n; ++i) y[i] += spec.sigma * rng.normal();
      SimRecord& rec = records[r];
      if (spec.beta != 0.0) rec.truth = active;
      std::sort(rec.truth.begin(), rec.truth.end());
      try {
        const auto start = std::chrono::steady_clock::now();
        if (spec.method == SimMethod::f1st) {
          rec.selected = f1st(x, std::span<const double>(y), cfg).sorted_set();
        } else {
          const ApproximationSet set = f3st(x, std::span<const double>(y), cfg);
          if (set.size() > 0) rec.selected = set.results.front().sorted_set();
        }
        rec.time_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      } catch (const std::exception& e) {
        rec.error = e.what();
        continue;
      }
      const SelectionScore s = score_selection(rec.truth, rec.selected);
      rec.fp = s.fp;
      rec.fn = s.fn;
      rec.exact = s.exact;
    }
  });

  SimReport out;
  std::size_t ok = 0;
  for (const SimRecord& rec : records) {
    if (!rec.error.empty()) {
      ++out.failures;
      continue;
    }
    ++ok;
    out.fp_mean += static_cast<double>(rec.fp);
    out.fn_mean += static_cast<double>(rec.fn);
    out.pct_correct += rec.exact ? 1.0 : 0.0;
    out.mean_time_seconds += rec.time_seconds;
  }
  if (ok > 0) {
    const double d = static_cast<double>(ok);
    out.fp_mean /= d;
    out.fn_mean /= d;
    out.pct_correct *= 100.0 / d;
    out.mean_time_seconds /= d;
  }
  out.records = std::move(records);
  return out;
}

inline std::string method_label(const SimSpec& spec) {
  return spec.method == SimMethod::f1st ? "f1st" : "f3st,m=" + std::to_string(spec.cfg.m);
}

// One row in the layout of a recovery table: method, fp, fn, %correct, time.
// With show_time false the time column is omitted so the output is
// reproducible byte for byte.
inline void write_sim_table(std::ostream& os, const SimSpec& spec, const SimReport& r,
                            bool show_time = true) {
  const auto flags = os.flags();
  const auto prec = os.precision();
  os << std::left << std::setw(12) << "method" << std::right << std::setw(8) << "fp" << std::setw(8)
     << "fn" << std::setw(10) << "%correct";
  if (show_time) os << std::setw(12) << "time";
  os << '\n';
  os << std::left << std::setw(12) << method_label(spec) << std::right << std::fixed
     << std::setprecision(2) << std::setw(8) << r.fp_mean << std::setw(8) << r.fn_mean
     << std::setprecision(1) << std::setw(10) << r.pct_correct;
  if (show_time) os << std::setprecision(4) << std::setw(12) << r.mean_time_seconds;
  os << '\n';
  if (r.failures) os << r.failures << " replication(s) failed\n";
  os.flags(flags);
  os.precision(prec);
}

}  // namespace gausscov
