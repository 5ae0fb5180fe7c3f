#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "gausscov/csv.hpp"
#include "gausscov/graph.hpp"
#include "gausscov/report.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using gausscov::Json;

namespace {

const std::string kCli = GAUSSCOV_CLI_PATH;
const std::string kFixtures = GAUSSCOV_FIXTURES;
const std::string kGolden = GAUSSCOV_GOLDEN;

struct CliRun {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = fs::temp_directory_path() / ("gausscov_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir_);
  }
  static void TearDownTestSuite() { fs::remove_all(dir_); }

  static fs::path tmp(const std::string& name) { return dir_ / name; }
  static std::string fixture(const std::string& name) { return kFixtures + "/" + name; }
  static std::string golden(const std::string& name) { return slurp(kGolden + "/" + name); }

  static CliRun run(const std::string& args) {
    const fs::path err = tmp("stderr.txt");
    const std::string cmd = kCli + " " + args + " 2>" + err.string();
    CliRun r;
    FILE* pipe = ::popen(cmd.c_str(), "r");
    if (!pipe) return r;
    char buf[4096];
    std::size_t got;
    while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, got);
    const int status = ::pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.err = slurp(err);
    return r;
  }

  static inline fs::path dir_;
};

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> f;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) f.push_back(cell);
    rows.push_back(f);
  }
  return rows;
}

double rss_from_json(const gausscov::DataMatrix& data, std::size_t response, const Json& result) {
  const gausscov::DataMatrix x = data.without_column(response);
  const auto y = data.column(response);
  double icpt = 0;
  if (!result["intercept"].is_null()) icpt = result["intercept"]["coefficient"].get<double>();
  std::vector<double> fit(y.size(), icpt);
  for (const Json& s : result["selected"]) {
    const auto col = x.column(s["index"].get<std::size_t>() - 1);
    const double b = s["coefficient"].get<double>();
    for (std::size_t i = 0; i < fit.size(); ++i) fit[i] += b * col[i];
  }
  double rss = 0;
  for (std::size_t i = 0; i < fit.size(); ++i) rss += (y[i] - fit[i]) * (y[i] - fit[i]);
  return rss;
}

}  // namespace

TEST_F(Cli, SelectTinyMatchesGolden) {
  const CliRun r = run("select " + fixture("tiny.csv") + " --no-time");
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, golden("select_tiny.txt"));
  EXPECT_TRUE(r.err.empty());
}

TEST_F(Cli, SelectTinyAgainstOracle) {
  const CliRun r = run("select " + fixture("tiny.csv") + " --output json --no-time");
  ASSERT_EQ(r.code, 0) << r.err;
  const Json j = Json::parse(r.out);
  const Json& sel = j["result"]["selected"];
  ASSERT_EQ(sel.size(), 1u);
  EXPECT_EQ(sel[0]["name"], "x1");
  EXPECT_EQ(sel[0]["index"], 1);

  const gausscov::DataMatrix data = gausscov::load_csv(fixture("tiny.csv"));
  const auto y = data.column(5);
  const std::vector<double> yv(y.begin(), y.end());
  const std::vector<double> ones(yv.size(), 1.0);
  const std::vector<double> x1(data.column(0).begin(), data.column(0).end());
  const oracle::LsFit with = oracle::least_squares({ones, x1}, yv);
  const oracle::LsFit without = oracle::least_squares({ones}, yv);
  EXPECT_NEAR(sel[0]["coefficient"].get<double>(), static_cast<double>(with.beta[1]), 1e-10);
  EXPECT_NEAR(j["result"]["intercept"]["coefficient"].get<double>(), static_cast<double>(with.beta[0]), 1e-10);
  EXPECT_NEAR(j["result"]["rss"].get<double>(), static_cast<double>(with.rss), 1e-10);
  // n = 30, fit dimension 2, five candidates competing for the one slot
  const long double pf = oracle::beta_cdf(14.0L, 0.5L, with.rss / without.rss);
  const double pg = static_cast<double>(-std::expm1(5.0L * std::log1p(-pf)));
  EXPECT_NEAR(sel[0]["pg"].get<double>() / pg, 1.0, 1e-8);
}

TEST_F(Cli, SelectCsvMatchesGoldenNumerically) {
  const CliRun r = run("select " + fixture("tiny.csv") + " --output csv");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto got = csv_rows(r.out), want = csv_rows(golden("select_tiny.csv"));
  ASSERT_EQ(got.size(), want.size());
  for (std::size_t i = 0; i < got.size(); ++i) {
    ASSERT_EQ(got[i].size(), want[i].size());
    for (std::size_t k = 0; k < got[i].size(); ++k) {
      if (i == 0 || k == 0 || k == 1 || k == 4) {
        EXPECT_EQ(got[i][k], want[i][k]);
      } else {
        const double a = std::stod(got[i][k]), b = std::stod(want[i][k]);
        EXPECT_NEAR(a, b, 1e-12 * std::abs(b));
      }
    }
  }
}

TEST_F(Cli, JsonRoundTripRecomputesRss) {
  const gausscov::DataMatrix data = gausscov::load_csv(fixture("twins.csv"));
  for (const std::string method : {"f1st", "f2st", "f3st", "allsubset"}) {
    const CliRun r = run("select " + fixture("twins.csv") + " --method " + method + " --m 2 --kmn 2 --output json");
    ASSERT_EQ(r.code, 0) << method << ": " << r.err;
    const Json j = Json::parse(r.out);
    EXPECT_TRUE(j.contains("time_seconds"));
    std::vector<Json> results;
    if (j.contains("result"))
      results.push_back(j["result"]);
    else
      for (const Json& a : j["approximations"]) results.push_back(a);
    ASSERT_FALSE(results.empty()) << method;
    for (const Json& res : results) {
      const double rss = res["rss"].get<double>();
      EXPECT_NEAR(rss_from_json(data, 6, res), rss, 1e-8 * std::max(1.0, rss)) << method;
    }
  }
}

TEST_F(Cli, F3stTwinsListsApproximationsByRss) {
  const CliRun text = run("select " + fixture("twins.csv") + " --method f3st --m 2 --no-time");
  EXPECT_EQ(text.code, 0) << text.err;
  EXPECT_EQ(text.out, golden("select_twins_f3st.txt"));

  const CliRun r = run("select " + fixture("twins.csv") + " --method f3st --m 2 --output json");
  const Json a = Json::parse(r.out)["approximations"];
  ASSERT_GE(a.size(), 2u);
  for (std::size_t i = 1; i < a.size(); ++i) EXPECT_LE(a[i - 1]["rss"].get<double>(), a[i]["rss"].get<double>());
}

TEST_F(Cli, ResponseByNameOrIndex) {
  const CliRun by_default = run("select " + fixture("tiny.csv") + " --no-time");
  const CliRun by_name = run("select " + fixture("tiny.csv") + " --response y --no-time");
  const CliRun by_index = run("select " + fixture("tiny.csv") + " --response 6 --no-time");
  EXPECT_EQ(by_default.out, by_name.out);
  EXPECT_EQ(by_default.out, by_index.out);
  const CliRun other = run("select " + fixture("tiny.csv") + " --response x1 --output json");
  ASSERT_EQ(other.code, 0);
  EXPECT_EQ(Json::parse(other.out)["response"]["name"], "x1");
}

TEST_F(Cli, GraphPairMatchesGolden) {
  const CliRun r = run("graph " + fixture("pair.csv") + " --rule and --no-time");
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, golden("graph_pair_and.txt"));
}

TEST_F(Cli, GraphAndEdgesWithinOrEdges) {
  gausscov::RandomGraphModel model = gausscov::make_random_graph(30, 3);
  const gausscov::DataMatrix x = gausscov::sample_graph_data(model, 80, 3);
  const fs::path data = tmp("graph.csv");
  {
    std::ofstream f(data);
    gausscov::write_csv(f, x);
  }
  const CliRun a = run("graph " + data.string() + " --rule and --output json");
  const CliRun o = run("graph " + data.string() + " --rule or --output json");
  ASSERT_EQ(a.code, 0) << a.err;
  ASSERT_EQ(o.code, 0) << o.err;
  const auto and_edges = Json::parse(a.out)["undirected"].get<std::vector<std::vector<int>>>();
  const auto or_edges = Json::parse(o.out)["undirected"].get<std::vector<std::vector<int>>>();
  EXPECT_FALSE(and_edges.empty());
  EXPECT_LT(and_edges.size(), or_edges.size() + 1);
  for (const auto& e : and_edges) EXPECT_NE(std::find(or_edges.begin(), or_edges.end(), e), or_edges.end());
}

TEST_F(Cli, GraphWritesEdgeFiles) {
  const fs::path edges = tmp("edges.csv"), dot = tmp("g.dot");
  const CliRun r = run("graph " + fixture("pair.csv") + " --edges " + edges.string() + " --dot " + dot.string());
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string e = slurp(edges);
  EXPECT_EQ(e.rfind("from,to,pg\n", 0), 0u);
  EXPECT_NE(e.find("\n1,2,"), std::string::npos);
  EXPECT_NE(e.find("\n2,1,"), std::string::npos);
  EXPECT_NE(slurp(dot).find("1 -- 2;"), std::string::npos);
}

TEST_F(Cli, GraphSimulationRow) {
  const CliRun r = run("graph --sim-p 40 --sim-n 200 --no-time");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("random graph (40,200)"), std::string::npos);
  EXPECT_NE(r.out.find("fgr1st"), std::string::npos);
  const CliRun j = run("graph --sim-p 40 --sim-n 200 --output json");
  const Json v = Json::parse(j.out);
  EXPECT_GT(v["true_edges"].get<int>(), 0);
  EXPECT_TRUE(v.contains("time_seconds"));
}

TEST_F(Cli, FeaturizeLags) {
  const CliRun r = run("featurize " + fixture("series.csv") + " --lags 1:2");
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, golden("lags_series.csv"));
  const gausscov::DataMatrix m = gausscov::parse_csv(r.out);
  EXPECT_EQ(m.rows(), 3u);
  EXPECT_EQ(m.cols(), 2u);
}

TEST_F(Cli, FeaturizeTrigShape) {
  const fs::path out = tmp("trig.csv"), names = tmp("trig_names.csv");
  const CliRun r = run("featurize --trig 1626 --length 3253 --out " + out.string() + " --names " + names.string());
  ASSERT_EQ(r.code, 0) << r.err;
  const gausscov::DataMatrix m = gausscov::load_csv(out.string());
  EXPECT_EQ(m.rows(), 3253u);
  EXPECT_EQ(m.cols(), 3252u);
  const std::string map = slurp(names);
  EXPECT_EQ(std::count(map.begin(), map.end(), '\n'), 3253);
}

TEST_F(Cli, FeaturizeInteractionsReportsCounts) {
  const fs::path out = tmp("inter.csv");
  const CliRun r = run("featurize " + fixture("thirteen.csv") + " --interactions 8 --out " + out.string());
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.err.find("203489 raw columns"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("176357 kept"), std::string::npos) << r.err;
  std::ifstream f(out);
  std::string header;
  std::getline(f, header);
  EXPECT_EQ(std::count(header.begin(), header.end(), ',') + 1, 176357);

  const CliRun budget = run("featurize " + fixture("thirteen.csv") + " --interactions 8 --budget 1000");
  EXPECT_EQ(budget.code, 3);
}

TEST_F(Cli, SimulateTableMatchesGolden) {
  const CliRun r = run("simulate --n 40 --q 100 --reps 10 --table --no-time");
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, golden("simulate_small.txt"));
  const CliRun j = run("simulate --n 40 --q 100 --reps 10 --output json --no-time");
  const Json v = Json::parse(j.out);
  EXPECT_EQ(v["records"].size(), 10u);
  EXPECT_EQ(v["seed"], 20240101);
  EXPECT_FALSE(v.contains("mean_time_seconds"));
}

TEST_F(Cli, ExitCodes) {
  const fs::path bad = tmp("bad.csv");
  {
    std::ofstream f(bad);
    f << "a,b\n1,2\n3,oops\n";
  }
  const struct {
    std::string args;
    int code;
  } cases[] = {
      {"select /nonexistent/file.csv", 2},
      {"select " + bad.string(), 2},
      {"select " + fixture("tiny.csv") + " --bogus", 3},
      {"select " + fixture("tiny.csv") + " --p0 1.5", 3},
      {"select " + fixture("tiny.csv") + " --method nope", 3},
      {"select " + fixture("tiny.csv") + " --response nope", 3},
      {"select " + fixture("tiny.csv") + " --m 0", 3},
      {"select", 3},
      {"", 3},
      {"featurize " + fixture("series.csv") + " --lags 1:9", 2},
      {"featurize " + fixture("series.csv"), 3},
      {"graph", 3},
      {"simulate --n 5 --active 5", 3},
  };
  for (const auto& c : cases) {
    const CliRun r = run(c.args);
    EXPECT_EQ(r.code, c.code) << c.args;
    EXPECT_FALSE(r.err.empty()) << c.args;
    EXPECT_TRUE(r.out.empty()) << c.args;
  }
  EXPECT_EQ(run("--help").code, 0);
  EXPECT_EQ(run("select --help").code, 0);
}

TEST_F(Cli, EmptySelectionIsSuccess) {
  const CliRun r = run("select " + fixture("tiny.csv") + " --response 3 --no-time");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("no covariate selected"), std::string::npos);
}

TEST_F(Cli, DeterministicAcrossRunsAndThreads) {
  gausscov::RandomGraphModel model = gausscov::make_random_graph(60, 8);
  const gausscov::DataMatrix x = gausscov::sample_graph_data(model, 120, 8);
  const fs::path data = tmp("det.csv");
  {
    std::ofstream f(data);
    gausscov::write_csv(f, x);
  }
  const std::vector<std::string> commands{
      "select " + data.string() + " --output json --no-time",
      "select " + data.string() + " --method f3st --m 2 --kmn 3 --output json --no-time",
      "graph " + data.string() + " --output json --no-time",
      "simulate --n 40 --q 200 --reps 8 --output json --no-time",
  };
  for (const std::string& c : commands) {
    const CliRun a = run(c + " --threads 1"), b = run(c + " --threads 1"), w = run(c + " --threads 8");
    ASSERT_EQ(a.code, 0) << c << a.err;
    EXPECT_EQ(a.out, b.out) << c;
    EXPECT_EQ(a.out, w.out) << c;
  }
}
