#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numbers>
#include <ostream>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "gausscov/data_matrix.hpp"
#include "gausscov/error.hpp"
#include "gausscov/parallel.hpp"
#include "gausscov/rng.hpp"
#include "gausscov/select.hpp"

namespace gausscov {

// How directed edges are combined into undirected ones.
enum class EdgeRule {
  and_rule,  // i -- j when both i -> j and j -> i were selected
  or_rule,   // i -- j when either direction was selected
};

struct DirectedEdge {
  std::size_t from = 0;
  std::size_t to = 0;
  double pg = 1.0;
  bool operator==(const DirectedEdge&) const = default;
};

struct GraphResult {
  std::vector<DirectedEdge> directed_edges;                     // sorted by (from, to)
  std::vector<std::pair<std::size_t, std::size_t>> undirected;  // i < j, sorted
  std::size_t node_count = 0;
  EdgeRule rule = EdgeRule::or_rule;
};

inline std::vector<std::pair<std::size_t, std::size_t>> combine_edges(
    const std::vector<DirectedEdge>& directed, EdgeRule rule) {
  std::map<std::pair<std::size_t, std::size_t>, int> seen;
  for (const auto& e : directed) {
    const auto key = std::minmax(e.from, e.to);
    seen[{key.first, key.second}] |= e.from < e.to ? 1 : 2;
  }
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (const auto& [key, dirs] : seen)
    if (rule == EdgeRule::or_rule || dirs == 3) out.push_back(key);
  return out;
}

// Gaussian covariate graph: each column in turn is the response of an f1st
// run over the remaining columns; j -> i for every selected i.
template <ColumnSource M>
GraphResult fgr1st(const M& m, const SelectionConfig& cfg, EdgeRule rule = EdgeRule::or_rule) {
  cfg.validate();
  const std::size_t q = m.cols();
  if (q < 2) throw DomainError("a graph needs at least two columns");
  const std::size_t threads = resolve_threads(cfg.threads);
  SelectionConfig inner = cfg;
  inner.threads = 1;
  std::vector<std::vector<DirectedEdge>> per_node(q);
  parallel_blocks(0, q, threads, 1, [&](std::size_t lo, std::size_t hi, std::size_t) {
    std::vector<char> mask(q, 0);
    std::vector<double> scratch;
    for (std::size_t j = lo; j < hi; ++j) {
      auto col = m.column(j, scratch);
      const std::vector<double> y(col.begin(), col.end());
      mask[j] = 1;
      const SelectionResult r = f1st(m, std::span<const double>(y), inner, mask);
      mask[j] = 0;
      for (std::size_t t = 0; t < r.selected.size(); ++t)
        per_node[j].push_back({j, r.selected[t], r.pg[t]});
      std::sort(per_node[j].begin(), per_node[j].end(),
                [](const DirectedEdge& a, const DirectedEdge& b) { return a.to < b.to; });
    }
  });
  GraphResult g;
  g.node_count = q;
  g.rule = rule;
  for (auto& edges : per_node)
    g.directed_edges.insert(g.directed_edges.end(), edges.begin(), edges.end());
  g.undirected = combine_edges(g.directed_edges, rule);
  return g;
}

// Directed edge list as CSV with 1-based node numbers.
inline void write_edges_csv(std::ostream& os, const GraphResult& g) {
  os << "from,to,pg\n";
  os.precision(17);
  for (const auto& e : g.directed_edges) os << e.from + 1 << ',' << e.to + 1 << ',' << e.pg << '\n';
}

// Undirected graph in DOT, nodes labelled with column names when given.
inline void write_dot(std::ostream& os, const GraphResult& g,
                      const std::vector<std::string>& names = {}) {
  os << "graph gausscov {\n";
  for (std::size_t v = 0; v < g.node_count; ++v) {
    os << "  " << v + 1;
    if (v < names.size()) {
      std::string label;
      for (char c : names[v]) {
        if (c == '"' || c == '\\') label += '\\';
        label += c;
      }
      os << " [label=\"" << label << "\"]";
    }
    os << ";\n";
  }
  for (const auto& [i, j] : g.undirected) os << "  " << i + 1 << " -- " << j + 1 << ";\n";
  os << "}\n";
}

// Sparse Gaussian graphical model on points in the unit square.
struct RandomGraphModel {
  std::size_t nodes = 0;
  std::vector<std::pair<std::size_t, std::size_t>> edges;  // i < j, sorted
  double partial_weight = 0.245;  // precision entry of every edge, diagonal 1
  double diagonal = 1.0;          // after any loading needed for positive definiteness
};

// Nodes uniform on [0,1]^2; pair (i, j) joined with probability
// exp(-p d_ij^2 / 2); random edges of over-connected nodes removed until
// every degree is at most max_degree.
inline RandomGraphModel make_random_graph(std::size_t p, std::uint64_t seed,
                                          std::size_t max_degree = 4) {
  Rng rng(seed, 0x67726170ull);
  std::vector<double> px(p), py(p);
  for (std::size_t i = 0; i < p; ++i) {
    px[i] = rng.uniform();
    py[i] = rng.uniform();
  }
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = i + 1; j < p; ++j) {
      const double dx = px[i] - px[j], dy = py[i] - py[j];
      const double prob = std::exp(-0.5 * static_cast<double>(p) * (dx * dx + dy * dy));
      if (rng.uniform() < prob) edges.emplace_back(i, j);
    }
  }
  std::vector<std::vector<std::size_t>> incident(p);
  std::vector<char> alive(edges.size(), 1);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    incident[edges[e].first].push_back(e);
    incident[edges[e].second].push_back(e);
  }
  auto degree = [&](std::size_t v) {
    std::size_t d = 0;
    for (std::size_t e : incident[v]) d += alive[e];
    return d;
  };
  for (std::size_t v = 0; v < p; ++v) {
    while (degree(v) > max_degree) {
      std::vector<std::size_t> live;
      for (std::size_t e : incident[v])
        if (alive[e]) live.push_back(e);
      alive[live[static_cast<std::size_t>(rng.below(live.size()))]] = 0;
    }
  }
  RandomGraphModel model;
  model.nodes = p;
  for (std::size_t e = 0; e < edges.size(); ++e)
    if (alive[e]) model.edges.push_back(edges[e]);
  return model;
}

namespace detail {

// Dense lower Cholesky factor of a symmetric matrix, row-major. Returns false
// when a pivot is not positive.
inline bool cholesky(std::vector<double>& a, std::size_t p) {
  for (std::size_t j = 0; j < p; ++j) {
    double d = a[j * p + j];
    for (std::size_t k = 0; k < j; ++k) d -= a[j * p + k] * a[j * p + k];
    if (!(d > 0.0)) return false;
    d = std::sqrt(d);
    a[j * p + j] = d;
    for (std::size_t i = j + 1; i < p; ++i) {
      double s = a[i * p + j];
      for (std::size_t k = 0; k < j; ++k) s -= a[i * p + k] * a[j * p + k];
      a[i * p + j] = s / d;
    }
    for (std::size_t k = j + 1; k < p; ++k) a[j * p + k] = 0.0;
  }
  return true;
}

}  // namespace detail

// n draws from N(0, K^{-1}) where K has `diagonal` on the diagonal and
// `partial_weight` on each edge. The diagonal is raised until K is positive
// definite.
inline DataMatrix sample_graph_data(RandomGraphModel& model, std::size_t n, std::uint64_t seed) {
  const std::size_t p = model.nodes;
  std::vector<double> factor;
  bool ok = false;
  for (int attempt = 0; attempt < 8 && !ok; ++attempt) {
    factor.assign(p * p, 0.0);
    for (std::size_t i = 0; i < p; ++i) factor[i * p + i] = model.diagonal;
    for (const auto& [i, j] : model.edges) {
      factor[i * p + j] = model.partial_weight;
      factor[j * p + i] = model.partial_weight;
    }
    ok = detail::cholesky(factor, p);
    if (!ok) model.diagonal *= 1.5;
  }
  if (!ok) throw GenerationFailure("precision matrix is not positive definite");
  // K = L L' and x = L'^{-1} z gives Cov(x) = K^{-1}
  Rng rng(seed, 0x73616d70ull);
  std::vector<double> values(n * p);
  std::vector<double> z(p);
  for (std::size_t r = 0; r < n; ++r) {
    for (double& v : z) v = rng.normal();
    for (std::size_t i = p; i-- > 0;) {
      double s = z[i];
      for (std::size_t k = i + 1; k < p; ++k) s -= factor[k * p + i] * z[k];
      z[i] = s / factor[i * p + i];
    }
    for (std::size_t i = 0; i < p; ++i) values[i * n + r] = z[i];
  }
  return DataMatrix(n, p, std::move(values));
}

struct GraphSimMetrics {
  std::size_t true_edges = 0;
  std::size_t edges = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  double time_seconds = 0.0;
};

inline GraphSimMetrics score_graph(const std::vector<std::pair<std::size_t, std::size_t>>& truth,
                                   const std::vector<std::pair<std::size_t, std::size_t>>& found) {
  const std::set<std::pair<std::size_t, std::size_t>> t(truth.begin(), truth.end());
  const std::set<std::pair<std::size_t, std::size_t>> f(found.begin(), found.end());
  GraphSimMetrics out;
  out.true_edges = t.size();
  out.edges = f.size();
  for (const auto& e : f) out.fp += t.count(e) ? 0 : 1;
  for (const auto& e : t) out.fn += f.count(e) ? 0 : 1;
  return out;
}

// One random-graph replication: generate, sample, estimate, score. Only the
// fgr1st call is timed.
inline GraphSimMetrics random_graph_sim(std::size_t p, std::size_t n, std::uint64_t seed,
                                        const SelectionConfig& cfg,
                                        EdgeRule rule = EdgeRule::or_rule) {
  if (p < 20 || n < 20) throw DomainError("random graph simulation needs p, n >= 20");
  RandomGraphModel model = make_random_graph(p, seed);
  const DataMatrix data = sample_graph_data(model, n, seed);
  const auto start = std::chrono::steady_clock::now();
  const GraphResult g = fgr1st(data, cfg, rule);
  const auto stop = std::chrono::steady_clock::now();
  GraphSimMetrics out = score_graph(model.edges, g.undirected);
  out.time_seconds = std::chrono::duration<double>(stop - start).count();
  return out;
}

}  // namespace gausscov
