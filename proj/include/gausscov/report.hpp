#pragma once

// JSON and text rendering of results. Indices are 1-based in every
// user-facing form; x0 denotes the intercept.

#include <cmath>
#include <cstddef>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "gausscov/csv.hpp"
#include "gausscov/graph.hpp"
#include "gausscov/select.hpp"
#include "gausscov/sim.hpp"

namespace gausscov {

using Json = nlohmann::json;

namespace detail {

inline std::string column_name(const std::vector<std::string>& names, std::size_t j) {
  return j < names.size() ? names[j] : "x" + std::to_string(j + 1);
}

}  // namespace detail

inline Json to_json(const SelectionResult& r, const std::vector<std::string>& names) {
  Json sel = Json::array();
  for (std::size_t t = 0; t < r.selected.size(); ++t) {
    sel.push_back({{"index", r.selected[t] + 1},
                   {"name", detail::column_name(names, r.selected[t])},
                   {"pg", r.pg[t]},
                   {"coefficient", r.coefficients[t]},
                   {"forced", r.forced[t] != 0}});
  }
  Json trace = Json::array();
  for (const StepRecord& s : r.trace)
    trace.push_back({{"index", s.column + 1},
                     {"pf", s.pf},
                     {"pg", s.pg},
                     {"rss", s.rss},
                     {"forced", s.forced}});
  Json out{{"selected", std::move(sel)}, {"rss", r.rss}, {"refined", r.refined}, {"trace", std::move(trace)}};
  if (!std::isnan(r.intercept_pg))
    out["intercept"] = {{"name", "x0"}, {"coefficient", r.intercept}, {"pg", r.intercept_pg}};
  else
    out["intercept"] = nullptr;
  return out;
}

inline Json to_json(const ApproximationSet& set, const std::vector<std::string>& names) {
  Json arr = Json::array();
  for (std::size_t i = 0; i < set.size(); ++i) {
    Json r = to_json(set.results[i], names);
    r["provenance"] = set.provenance[i];
    arr.push_back(std::move(r));
  }
  return arr;
}

inline Json to_json(const GraphResult& g) {
  Json directed = Json::array();
  for (const auto& e : g.directed_edges) directed.push_back({{"from", e.from + 1}, {"to", e.to + 1}, {"pg", e.pg}});
  Json undirected = Json::array();
  for (const auto& [i, j] : g.undirected) undirected.push_back({i + 1, j + 1});
  return {{"nodes", g.node_count},
          {"rule", g.rule == EdgeRule::and_rule ? "and" : "or"},
          {"directed", std::move(directed)},
          {"undirected", std::move(undirected)}};
}

inline Json to_json(const SimReport& r, bool with_time = true) {
  Json recs = Json::array();
  for (const SimRecord& rec : r.records) {
    Json j{{"truth", Json::array()}, {"selected", Json::array()}, {"fp", rec.fp}, {"fn", rec.fn}, {"exact", rec.exact}};
    for (std::size_t c : rec.truth) j["truth"].push_back(c + 1);
    for (std::size_t c : rec.selected) j["selected"].push_back(c + 1);
    if (with_time) j["time_seconds"] = rec.time_seconds;
    if (!rec.error.empty()) j["error"] = rec.error;
    recs.push_back(std::move(j));
  }
  Json out{{"fp_mean", r.fp_mean}, {"fn_mean", r.fn_mean}, {"pct_correct", r.pct_correct},
           {"failures", r.failures}, {"records", std::move(recs)}};
  if (with_time) out["mean_time_seconds"] = r.mean_time_seconds;
  return out;
}

// Selected covariates with P_G and coefficient, then x0, then rss.
inline void write_selection_text(std::ostream& os, const SelectionResult& r,
                                 const std::vector<std::string>& names) {
  std::ostringstream body;
  body << std::setprecision(6);
  body << std::right << std::setw(8) << "index" << "  " << std::left << std::setw(16) << "name" << std::right
       << std::setw(14) << "pg" << std::setw(16) << "coefficient" << '\n';
  for (std::size_t t = 0; t < r.selected.size(); ++t) {
    body << std::setw(8) << r.selected[t] + 1 << "  " << std::left << std::setw(16)
         << detail::column_name(names, r.selected[t]) << std::right << std::setw(14) << r.pg[t]
         << std::setw(16) << r.coefficients[t] << (r.forced[t] ? "  forced" : "") << '\n';
  }
  if (!std::isnan(r.intercept_pg))
    body << std::setw(8) << 0 << "  " << std::left << std::setw(16) << "x0" << std::right << std::setw(14)
         << r.intercept_pg << std::setw(16) << r.intercept << '\n';
  body << "rss " << std::setprecision(10) << r.rss << '\n';
  if (r.selected.empty()) body << "no covariate selected\n";
  os << body.str();
}

inline void write_approximations_text(std::ostream& os, const ApproximationSet& set,
                                      const std::vector<std::string>& names) {
  std::ostringstream body;
  body << set.size() << " approximation(s)\n";
  for (std::size_t i = 0; i < set.size(); ++i) {
    const SelectionResult& r = set.results[i];
    body << std::setw(4) << i + 1 << "  rss " << std::setprecision(10) << r.rss << "  {";
    for (std::size_t t = 0; t < r.selected.size(); ++t)
      body << (t ? " " : "") << detail::column_name(names, r.selected[t]);
    body << "}  " << set.provenance[i] << '\n';
  }
  os << body.str();
}

inline void write_selection_csv(std::ostream& os, const SelectionResult& r,
                                const std::vector<std::string>& names) {
  std::ostringstream body;
  body << std::setprecision(17);
  body << "index,name,pg,coefficient,forced\n";
  for (std::size_t t = 0; t < r.selected.size(); ++t)
    body << r.selected[t] + 1 << ',' << detail::csv_field(detail::column_name(names, r.selected[t]), ',') << ',' << r.pg[t] << ','
         << r.coefficients[t] << ',' << int(r.forced[t] != 0) << '\n';
  if (!std::isnan(r.intercept_pg)) body << "0,x0," << r.intercept_pg << ',' << r.intercept << ",0\n";
  os << body.str();
}

}  // namespace gausscov
