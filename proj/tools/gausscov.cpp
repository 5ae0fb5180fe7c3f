// gausscov command-line front end.
//
// Exit codes: 0 success (including an empty selection), 1 internal error,
// 2 input could not be read or used, 3 invalid configuration or usage.

#include <CLI11.hpp>

#include <chrono>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include "gausscov/gausscov.hpp"
#include "gausscov/report.hpp"

namespace {

using namespace gausscov;

constexpr int kExitInternal = 1;
constexpr int kExitInput = 2;
constexpr int kExitConfig = 3;
constexpr std::uint64_t kDefaultSeed = 20240101;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  double p0 = 0.01;
  std::size_t kmn = 0;
  std::size_t m = 1;
  std::string method = "f1st";
  bool intercept = true;
  std::uint64_t seed = kDefaultSeed;
  std::string output = "text";
  std::size_t threads = 0;
  bool no_time = false;
  // CSV reading
  std::string delimiter = ",";
  std::string header = "auto";
  bool drop_na = false;

  SelectionConfig selection() const {
    SelectionConfig cfg;
    cfg.p0 = p0;
    cfg.kmn = kmn;
    cfg.m = m;
    cfg.intercept = intercept;
    cfg.threads = threads;
    return cfg;
  }

  CsvOptions csv() const {
    if (delimiter.size() != 1) throw ConfigError("--delimiter must be a single character");
    CsvOptions o;
    o.delimiter = delimiter == "\\t" ? '\t' : delimiter[0];
    o.header = header == "yes" ? HeaderMode::present : header == "no" ? HeaderMode::absent : HeaderMode::automatic;
    o.na_policy = drop_na ? NaPolicy::drop_row : NaPolicy::reject;
    return o;
  }
};

void add_common(CLI::App* app, Common& c, bool selection_flags = true) {
  if (selection_flags) {
    app->add_option("--p0", c.p0, "cut-off P-value")->capture_default_str();
    app->add_option("--kmn", c.kmn, "minimum number of covariates to select")->capture_default_str();
    app->add_option("--m", c.m, "f3st exclusion depth")->capture_default_str();
    app->add_flag("--intercept,!--no-intercept", c.intercept, "include the intercept x0")->capture_default_str();
  }
  app->add_option("--seed", c.seed, "random seed")->capture_default_str();
  app->add_option("--threads", c.threads, "worker threads, 0 for all (capped by GAUSSCOV_THREADS)")
      ->capture_default_str();
  app->add_flag("--no-time", c.no_time, "omit wall-clock timings from the output");
}

void add_csv(CLI::App* app, Common& c) {
  app->add_option("--delimiter", c.delimiter, "field separator")->capture_default_str();
  app->add_option("--header", c.header, "header row")
      ->check(CLI::IsMember({"auto", "yes", "no"}))
      ->capture_default_str();
  app->add_flag("--drop-na", c.drop_na, "drop rows with missing values instead of failing");
}

DataMatrix read_data(const std::string& path, const Common& c) {
  try {
    return load_csv(path, c.csv());
  } catch (const ParseError& e) {
    throw InputError(e.what());
  } catch (const gausscov::Error& e) {
    throw InputError(path + ": " + e.what());
  }
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw InputError("cannot write " + path);
  return f;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// Name first, then 1-based index.
std::size_t resolve_response(const DataMatrix& data, const std::string& spec) {
  if (data.cols() < 2) throw InputError("need a response and at least one covariate column");
  if (spec.empty()) return data.cols() - 1;
  const auto& names = data.names();
  for (std::size_t j = 0; j < names.size(); ++j)
    if (names[j] == spec) return j;
  std::size_t idx = 0;
  const auto [ptr, ec] = std::from_chars(spec.data(), spec.data() + spec.size(), idx);
  if (ec == std::errc() && ptr == spec.data() + spec.size() && idx >= 1 && idx <= data.cols()) return idx - 1;
  throw ConfigError("response '" + spec + "' is neither a column name nor an index in 1.." +
                    std::to_string(data.cols()));
}

// ---------------------------------------------------------------- select

struct SelectArgs {
  Common c;
  std::string path;
  std::string response;
};

void write_approximations_csv(std::ostream& os, const ApproximationSet& set, const std::vector<std::string>& names) {
  os << "approximation,index,name,pg,coefficient,forced\n";
  for (std::size_t i = 0; i < set.size(); ++i) {
    std::ostringstream one;
    write_selection_csv(one, set.results[i], names);
    std::istringstream lines(one.str());
    std::string line;
    std::getline(lines, line);  // header
    while (std::getline(lines, line)) os << i + 1 << ',' << line << '\n';
  }
}

int cmd_select(const SelectArgs& a) {
  const std::string& method = a.c.method;
  const SelectionConfig cfg = a.c.selection();
  cfg.validate();
  const DataMatrix data = read_data(a.path, a.c);
  const std::size_t ry = resolve_response(data, a.response);
  const auto ycol = data.column(ry);
  const std::vector<double> y(ycol.begin(), ycol.end());
  const DataMatrix x = data.without_column(ry);
  const std::vector<std::string>& names = x.names();

  const auto start = std::chrono::steady_clock::now();
  std::optional<SelectionResult> single;
  ApproximationSet set;
  if (method == "f1st") {
    single = f1st(x, std::span<const double>(y), cfg);
  } else if (method == "f2st") {
    set = f2st(x, std::span<const double>(y), cfg);
  } else if (method == "f3st") {
    set = f3st(x, std::span<const double>(y), cfg);
  } else {
    set = all_subset_select(x, std::span<const double>(y), cfg);
  }
  const double elapsed = seconds_since(start);

  std::ostringstream out;
  if (a.c.output == "json") {
    Json j;
    j["command"] = "select";
    j["method"] = method;
    j["p0"] = cfg.p0;
    j["kmn"] = cfg.kmn;
    j["m"] = cfg.m;
    j["intercept"] = cfg.intercept;
    j["n"] = x.rows();
    j["q"] = x.cols();
    j["response"] = {{"index", ry + 1}, {"name", data.names()[ry]}};
    if (single)
      j["result"] = to_json(*single, names);
    else
      j["approximations"] = to_json(set, names);
    if (!a.c.no_time) j["time_seconds"] = elapsed;
    out << j.dump(2) << '\n';
  } else if (a.c.output == "csv") {
    if (single)
      write_selection_csv(out, *single, names);
    else
      write_approximations_csv(out, set, names);
  } else {
    out << "method " << method << "  p0 " << cfg.p0 << "  kmn " << cfg.kmn;
    if (method == "f3st") out << "  m " << cfg.m;
    out << "  response " << data.names()[ry] << "  n " << x.rows() << "  q " << x.cols() << '\n';
    if (single) {
      write_selection_text(out, *single, names);
    } else {
      write_approximations_text(out, set, names);
      for (std::size_t i = 0; i < set.size(); ++i) {
        out << "\napproximation " << i + 1 << '\n';
        write_selection_text(out, set.results[i], names);
      }
    }
    if (!a.c.no_time) out << "time " << std::setprecision(4) << elapsed << " s\n";
  }
  std::cout << out.str();
  return 0;
}

// ----------------------------------------------------------------- graph

struct GraphArgs {
  Common c;
  std::string path;
  std::string rule = "or";
  std::string edges_path;
  std::string dot_path;
  std::size_t sim_p = 0;
  std::size_t sim_n = 0;
};

int cmd_graph_sim(const GraphArgs& a, const SelectionConfig& cfg, EdgeRule rule) {
  if (a.sim_p == 0 || a.sim_n == 0) throw ConfigError("--sim-p and --sim-n go together");
  const GraphSimMetrics s = random_graph_sim(a.sim_p, a.sim_n, a.c.seed, cfg, rule);
  std::ostringstream out;
  if (a.c.output == "json") {
    Json j{{"command", "graph-sim"}, {"p", a.sim_p}, {"n", a.sim_n},     {"seed", a.c.seed},
           {"rule", a.rule},         {"true_edges", s.true_edges},       {"edges", s.edges},
           {"fp", s.fp},             {"fn", s.fn}};
    if (!a.c.no_time) j["time_seconds"] = s.time_seconds;
    out << j.dump(2) << '\n';
  } else {
    out << "random graph (" << a.sim_p << "," << a.sim_n << ")  seed " << a.c.seed << '\n';
    out << std::left << std::setw(10) << "method" << std::right << std::setw(10) << "true" << std::setw(10)
        << "edges" << std::setw(8) << "fp" << std::setw(8) << "fn";
    if (!a.c.no_time) out << std::setw(10) << "time";
    out << '\n'
        << std::left << std::setw(10) << "fgr1st" << std::right << std::setw(10) << s.true_edges << std::setw(10)
        << s.edges << std::setw(8) << s.fp << std::setw(8) << s.fn;
    if (!a.c.no_time) out << std::setw(10) << std::fixed << std::setprecision(2) << s.time_seconds;
    out << '\n';
  }
  std::cout << out.str();
  return 0;
}

int cmd_graph(const GraphArgs& a) {
  const SelectionConfig cfg = a.c.selection();
  cfg.validate();
  const EdgeRule rule = a.rule == "and" ? EdgeRule::and_rule : EdgeRule::or_rule;
  if (a.sim_p != 0 || a.sim_n != 0) {
    if (!a.path.empty()) throw ConfigError("a data file cannot be combined with --sim-p/--sim-n");
    return cmd_graph_sim(a, cfg, rule);
  }
  if (a.path.empty()) throw ConfigError("graph needs a data file or --sim-p/--sim-n");
  const DataMatrix data = read_data(a.path, a.c);
  const auto start = std::chrono::steady_clock::now();
  const GraphResult g = fgr1st(data, cfg, rule);
  const double elapsed = seconds_since(start);

  if (!a.edges_path.empty()) {
    auto f = open_out(a.edges_path);
    write_edges_csv(f, g);
  }
  if (!a.dot_path.empty()) {
    auto f = open_out(a.dot_path);
    write_dot(f, g, data.names());
  }
  std::ostringstream out;
  if (a.c.output == "json") {
    Json j = to_json(g);
    j["command"] = "graph";
    j["names"] = data.names();
    if (!a.c.no_time) j["time_seconds"] = elapsed;
    out << j.dump(2) << '\n';
  } else if (a.c.output == "csv") {
    out << "i,j,name_i,name_j\n";
    for (const auto& [i, k] : g.undirected)
      out << i + 1 << ',' << k + 1 << ',' << detail::csv_field(data.names()[i], ',') << ','
          << detail::csv_field(data.names()[k], ',') << '\n';
  } else {
    out << "nodes " << g.node_count << "  rule " << a.rule << "  directed " << g.directed_edges.size()
        << "  edges " << g.undirected.size() << '\n';
    for (const auto& [i, k] : g.undirected)
      out << std::setw(6) << i + 1 << " -- " << std::setw(6) << std::left << k + 1 << std::right << "  "
          << data.names()[i] << " -- " << data.names()[k] << '\n';
    if (!a.c.no_time) out << "time " << std::setprecision(4) << elapsed << " s\n";
  }
  std::cout << out.str();
  return 0;
}

// ------------------------------------------------------------- featurize

struct FeaturizeArgs {
  Common c;
  std::string path;
  std::string lags;
  std::vector<std::size_t> variables;  // 1-based
  std::string targets_path;
  std::size_t trig = 0;
  std::size_t length = 0;
  std::size_t interactions = 0;
  bool no_dedup = false;
  std::size_t budget = InteractionSpec{}.column_budget;
  std::string out_path;
  std::string names_path;
};

LagSpec parse_lags(const std::string& s) {
  LagSpec spec;
  const auto colon = s.find(':');
  auto number = [&](std::string_view part) {
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
    if (ec != std::errc() || ptr != part.data() + part.size()) throw ConfigError("--lags expects a:b, got " + s);
    return v;
  };
  const std::string_view sv(s);
  if (colon == std::string::npos) {
    spec.min_lag = 1;
    spec.max_lag = number(sv);
  } else {
    spec.min_lag = number(sv.substr(0, colon));
    spec.max_lag = number(sv.substr(colon + 1));
  }
  if (spec.min_lag < 1 || spec.max_lag < spec.min_lag) throw ConfigError("--lags needs 1 <= a <= b");
  return spec;
}

template <class Writer>
void emit(const std::string& path, Writer&& write) {
  if (path.empty() || path == "-") {
    std::ostringstream os;
    write(os);
    std::cout << os.str();
  } else {
    auto f = open_out(path);
    write(f);
  }
}

int cmd_featurize(const FeaturizeArgs& a) {
  const int modes = int(!a.lags.empty()) + int(a.trig > 0) + int(a.interactions > 0);
  if (modes != 1) throw ConfigError("featurize needs exactly one of --lags, --trig, --interactions");
  const char delim = a.c.csv().delimiter;

  if (a.trig > 0) {
    if (!a.path.empty()) throw ConfigError("--trig takes --length, not a data file");
    if (a.length == 0) throw ConfigError("--trig needs --length");
    const DataMatrix t = make_trig(a.length, a.trig);
    std::cerr << "trig: " << t.rows() << " x " << t.cols() << '\n';
    emit(a.out_path, [&](std::ostream& os) { write_csv(os, t, delim); });
    if (!a.names_path.empty()) emit(a.names_path, [&](std::ostream& os) { write_name_map(os, t.names()); });
    return 0;
  }
  if (a.path.empty()) throw ConfigError("featurize needs a data file");
  const DataMatrix data = read_data(a.path, a.c);

  if (!a.lags.empty()) {
    LagSpec spec = parse_lags(a.lags);
    for (std::size_t v : a.variables) {
      if (v < 1 || v > data.cols()) throw ConfigError("--variables index " + std::to_string(v) + " out of range");
      spec.variables.push_back(v - 1);
    }
    const LagResult r = make_lags(data, spec);
    std::cerr << "lags: " << r.design.rows() << " x " << r.design.cols() << '\n';
    emit(a.out_path, [&](std::ostream& os) { write_csv(os, r.design, delim); });
    if (!a.targets_path.empty()) emit(a.targets_path, [&](std::ostream& os) { write_csv(os, r.targets, delim); });
    if (!a.names_path.empty())
      emit(a.names_path, [&](std::ostream& os) { write_name_map(os, r.design.names()); });
    return 0;
  }

  InteractionSpec spec;
  spec.max_degree = a.interactions;
  spec.dedup = !a.no_dedup;
  spec.column_budget = a.budget;
  const InteractionColumns cols = make_interactions(data, spec);
  std::cerr << "interactions: degree " << spec.max_degree << ", " << cols.raw_count() << " raw columns, "
            << cols.cols() << " kept" << (spec.dedup ? " after removing duplicates" : "") << '\n';
  emit(a.out_path, [&](std::ostream& os) { write_csv(os, cols, cols.names(), delim); });
  if (!a.names_path.empty()) emit(a.names_path, [&](std::ostream& os) { write_name_map(os, cols.names()); });
  return 0;
}

// -------------------------------------------------------------- simulate

struct SimulateArgs {
  Common c;
  SimSpec spec;
  std::string design_path;
  bool table = false;
};

int cmd_simulate(SimulateArgs& a) {
  SimSpec& spec = a.spec;
  spec.seed = a.c.seed;
  spec.cfg = a.c.selection();
  spec.cfg.threads = 1;
  spec.threads = a.c.threads;
  if (a.c.method == "f1st")
    spec.method = SimMethod::f1st;
  else if (a.c.method == "f3st")
    spec.method = SimMethod::f3st;
  else
    throw ConfigError("simulate supports --method f1st or f3st");
  spec.cfg.validate();
  if (!a.design_path.empty()) spec.design = std::make_shared<DataMatrix>(read_data(a.design_path, a.c));
  spec.validate();
  const SimReport r = run_sim(spec);

  std::ostringstream out;
  if (a.c.output == "json" && !a.table) {
    Json j = to_json(r, !a.c.no_time);
    j["command"] = "simulate";
    j["method"] = method_label(spec);
    j["n"] = spec.design ? spec.design->rows() : spec.n;
    j["q"] = spec.design ? spec.design->cols() : spec.q;
    j["active"] = spec.active_size;
    j["beta"] = spec.beta;
    j["sigma"] = spec.sigma;
    j["reps"] = spec.reps;
    j["seed"] = spec.seed;
    out << j.dump(2) << '\n';
  } else {
    write_sim_table(out, spec, r, !a.c.no_time);
    if (r.failures > 0) out << r.failures << " replication(s) failed\n";
  }
  std::cout << out.str();
  return 0;
}

int run(int argc, char** argv) {
  CLI::App app{"Covariate selection with Gaussian covariate P-values"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "gausscov 1.0.0");

  const std::vector<std::string> outputs{"text", "json", "csv"};

  SelectArgs sel;
  auto* s = app.add_subcommand("select", "select covariates for a response");
  s->add_option("data", sel.path, "CSV file, one column per variable")->required();
  s->add_option("--response", sel.response, "response column name or 1-based index (default: last column)");
  s->add_option("--method", sel.c.method, "selection procedure")
      ->check(CLI::IsMember({"f1st", "f2st", "f3st", "allsubset"}))
      ->capture_default_str();
  s->add_option("--output", sel.c.output, "output format")->check(CLI::IsMember(outputs))->capture_default_str();
  add_common(s, sel.c);
  add_csv(s, sel.c);

  GraphArgs gr;
  auto* g = app.add_subcommand("graph", "estimate the dependency graph of all columns");
  g->add_option("data", gr.path, "CSV file, one column per node");
  g->add_option("--rule", gr.rule, "edge rule for the undirected graph")
      ->check(CLI::IsMember({"and", "or"}))
      ->capture_default_str();
  g->add_option("--edges", gr.edges_path, "write directed edges as CSV");
  g->add_option("--dot", gr.dot_path, "write the undirected graph as DOT");
  g->add_option("--sim-p", gr.sim_p, "simulate a random graph with this many nodes");
  g->add_option("--sim-n", gr.sim_n, "sample size for the random graph simulation");
  g->add_option("--output", gr.c.output, "output format")->check(CLI::IsMember(outputs))->capture_default_str();
  add_common(g, gr.c);
  add_csv(g, gr.c);

  FeaturizeArgs fe;
  auto* f = app.add_subcommand("featurize", "build lag, trigonometric or interaction dictionaries");
  f->add_option("data", fe.path, "CSV file (not used with --trig)");
  f->add_option("--lags", fe.lags, "lag range a:b, or b for 1:b");
  f->add_option("--variables", fe.variables, "1-based source columns to lag (default: all)")->delimiter(',');
  f->add_option("--targets", fe.targets_path, "write the aligned source columns for lag designs");
  f->add_option("--trig", fe.trig, "number of cosine/sine pairs");
  f->add_option("--length", fe.length, "series length for --trig");
  f->add_option("--interactions", fe.interactions, "maximum monomial degree");
  f->add_flag("--no-dedup", fe.no_dedup, "keep duplicate interaction columns");
  f->add_option("--budget", fe.budget, "maximum raw interaction column count")->capture_default_str();
  f->add_option("--out", fe.out_path, "matrix output file (default: stdout)");
  f->add_option("--names", fe.names_path, "write the index,name map");
  add_common(f, fe.c, false);
  add_csv(f, fe.c);

  SimulateArgs si;
  si.c.method = "f1st";
  auto* m = app.add_subcommand("simulate", "replicate recovery simulations on a Gaussian or given design");
  m->add_option("--n", si.spec.n, "rows of the generated design")->capture_default_str();
  m->add_option("--q", si.spec.q, "columns of the generated design")->capture_default_str();
  m->add_option("--design", si.design_path, "CSV design to use instead of a generated one");
  m->add_option("--active", si.spec.active_size, "number of active covariates")->capture_default_str();
  m->add_option("--beta", si.spec.beta, "coefficient of every active covariate")->capture_default_str();
  m->add_option("--sigma", si.spec.sigma, "noise standard deviation")->capture_default_str();
  m->add_option("--reps", si.spec.reps, "replications")->capture_default_str();
  m->add_option("--method", si.c.method, "f1st or f3st")->check(CLI::IsMember({"f1st", "f3st"}))->capture_default_str();
  m->add_flag("--table", si.table, "print the fp / fn / %correct table");
  m->add_option("--output", si.c.output, "output format")
      ->check(CLI::IsMember({"text", "json"}))
      ->capture_default_str();
  add_common(m, si.c);
  add_csv(m, si.c);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*s) return cmd_select(sel);
    if (*g) return cmd_graph(gr);
    if (*f) return cmd_featurize(fe);
    return cmd_simulate(si);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const TooManyColumns& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ColumnBudgetExceeded& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const InsufficientLength& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const gausscov::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
