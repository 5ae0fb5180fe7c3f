#include <gtest/gtest.h>

#include <memory>
#include <sstream>

#include "gausscov/report.hpp"
#include "gausscov/sim.hpp"
#include "test_util.hpp"

using namespace gausscov;

TEST(ScoreSelection, Examples) {
  auto s = score_selection({1, 2}, {1, 2});
  EXPECT_EQ(s.fp, 0u);
  EXPECT_EQ(s.fn, 0u);
  EXPECT_TRUE(s.exact);
  s = score_selection({1, 2}, {1, 3, 4});
  EXPECT_EQ(s.fp, 2u);
  EXPECT_EQ(s.fn, 1u);
  EXPECT_FALSE(s.exact);
  s = score_selection({}, {});
  EXPECT_TRUE(s.exact);
}

TEST(RunSim, Validates) {
  SimSpec spec;
  spec.n = 5;
  spec.active_size = 5;
  EXPECT_THROW(run_sim(spec), DomainError);
  spec = {};
  spec.reps = 0;
  EXPECT_THROW(run_sim(spec), DomainError);
}

TEST(RunSim, RecoversAtSmallScale) {
  SimSpec spec;
  spec.n = 71;
  spec.q = 400;
  spec.reps = 20;
  spec.seed = 3;
  const SimReport r = run_sim(spec);
  EXPECT_GE(r.pct_correct, 90.0);
  EXPECT_LE(r.fp_mean, 0.2);
  EXPECT_LE(r.fn_mean, 0.2);
  EXPECT_EQ(r.records.size(), 20u);
  EXPECT_EQ(r.failures, 0u);
  for (const auto& rec : r.records) EXPECT_EQ(rec.truth.size(), 4u);
}

TEST(RunSim, NullSignalRarelySelects) {
  SimSpec spec;
  spec.n = 100;
  spec.q = 1000;
  spec.beta = 0.0;
  spec.reps = 200;
  spec.seed = 4;
  const SimReport r = run_sim(spec);
  EXPECT_LE(r.fp_mean, 0.05);
  for (const auto& rec : r.records) EXPECT_TRUE(rec.truth.empty());
  EXPECT_GE(r.pct_correct, 95.0);
}

TEST(RunSim, SeededDeterminismAcrossThreads) {
  SimSpec spec;
  spec.n = 50;
  spec.q = 300;
  spec.reps = 12;
  spec.seed = 5;
  spec.cfg.kmn = 2;
  SimSpec wide = spec;
  wide.threads = 8;
  const SimReport a = run_sim(spec), b = run_sim(spec), c = run_sim(wide);
  EXPECT_EQ(to_json(a, false).dump(), to_json(b, false).dump());
  EXPECT_EQ(to_json(a, false).dump(), to_json(c, false).dump());
}

TEST(RunSim, DifferentSeedsDiffer) {
  SimSpec spec;
  spec.n = 50;
  spec.q = 300;
  spec.reps = 5;
  SimSpec other = spec;
  other.seed = spec.seed + 1;
  EXPECT_NE(run_sim(spec).records[0].truth, run_sim(other).records[0].truth);
}

TEST(RunSim, F3stUsesBestApproximation) {
  SimSpec spec;
  spec.n = 60;
  spec.q = 200;
  spec.reps = 5;
  spec.method = SimMethod::f3st;
  spec.cfg.m = 2;
  const SimReport r = run_sim(spec);
  EXPECT_GE(r.pct_correct, 80.0);
  EXPECT_EQ(method_label(spec), "f3st,m=2");
}

TEST(RunSim, FileDesign) {
  SimSpec spec;
  spec.design = std::make_shared<DataMatrix>(test::gaussian_matrix(70, 150, 9, 3.0, 10.0));
  spec.reps = 5;
  const SimReport r = run_sim(spec);
  EXPECT_EQ(r.records.size(), 5u);
  EXPECT_GE(r.pct_correct, 80.0);
}

TEST(SimTable, Layout) {
  SimSpec spec;
  SimReport r;
  r.fp_mean = 0.07;
  r.fn_mean = 0.05;
  r.pct_correct = 98;
  std::ostringstream os;
  write_sim_table(os, spec, r, false);
  EXPECT_EQ(os.str(),
            "method            fp      fn  %correct\n"
            "f1st            0.07    0.05      98.0\n");
}
