#include <algorithm>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "sccount/metrics.hpp"

using namespace sccount;

TEST(Metrics, UnitVectors) {
  const std::vector<int> est{1, 1, 2}, truth{1, 2, 2};
  EXPECT_NEAR(accuracy(est, truth), 200.0 / 3.0, 1e-12);
  EXPECT_NEAR(mae(est, truth), 1.0 / 3.0, 1e-15);
  EXPECT_EQ(accuracy(truth, truth), 100.0);
  EXPECT_EQ(mae(truth, truth), 0.0);
  std::vector<int> plus = truth;
  for (auto& v : plus) ++v;
  EXPECT_EQ(mae(plus, truth), 1.0);
}

TEST(Metrics, Errors) {
  EXPECT_THROW(accuracy(std::vector<int>{1}, std::vector<int>{1, 2}), UsageError);
  EXPECT_THROW(mae(std::vector<int>{}, std::vector<int>{}), UsageError);
}

TEST(Metrics, RandomPairsMatchBruteForce) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> k(0, 4);
  std::uniform_int_distribution<std::size_t> len(1, 300);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t T = len(rng);
    std::vector<int> a(T), b(T);
    for (std::size_t i = 0; i < T; ++i) {
      a[i] = k(rng);
      b[i] = k(rng);
    }
    std::size_t hits = 0;
    long err = 0;
    for (std::size_t i = 0; i < T; ++i) {
      hits += a[i] == b[i];
      err += std::abs(a[i] - b[i]);
    }
    EXPECT_NEAR(accuracy(a, b), 100.0 * double(hits) / double(T), 1e-12);
    EXPECT_NEAR(mae(a, b), double(err) / double(T), 1e-12);
    EXPECT_LE(mae(a, b), 4.0);
    EXPECT_EQ(accuracy(a, b) == 100.0, mae(a, b) == 0.0);
    // Identical permutation of both sequences.
    std::vector<std::size_t> perm(T);
    for (std::size_t i = 0; i < T; ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<int> pa(T), pb(T);
    for (std::size_t i = 0; i < T; ++i) {
      pa[i] = a[perm[i]];
      pb[i] = b[perm[i]];
    }
    EXPECT_NEAR(accuracy(pa, pb), accuracy(a, b), 1e-12);
  }
}

TEST(Evaluate, ReportAggregatesFrames) {
  std::vector<ScoredScene> scenes(2);
  scenes[0] = {"a", {0, 1, 1, 2}, {0, 1, 2, 2}};
  scenes[1] = {"b", {3, 3}, {3, 3}};
  const EvalReport r = evaluate(scenes);
  EXPECT_EQ(r.frames_total, 6u);
  EXPECT_NEAR(r.accuracy_pct, 500.0 / 6.0, 1e-12);
  EXPECT_NEAR(r.mae, 1.0 / 6.0, 1e-12);
  ASSERT_EQ(r.per_scene.size(), 2u);
  EXPECT_EQ(r.per_scene[0].frames, 4u);
  EXPECT_EQ(r.per_scene[0].accuracy_pct, 75.0);
  EXPECT_EQ(r.per_scene[1].mae, 0.0);
  std::size_t sum = 0;
  for (const auto& s : r.per_scene) sum += s.frames;
  EXPECT_EQ(sum, r.frames_total);

  // Skipping leading frames for diagnostics.
  const EvalReport skipped = evaluate(scenes, 1);
  EXPECT_EQ(skipped.frames_total, 4u);

  std::ostringstream table, records;
  print_report_table(table, r);
  write_report_records(records, r);
  EXPECT_NE(table.str().find("TOTAL"), std::string::npos);
  EXPECT_NE(records.str().find("scene a frames 4 accuracy 75 mae 0.25"), std::string::npos);
}

TEST(Evaluate, PerfectEstimates) {
  std::vector<ScoredScene> s{{"x", {0, 1, 2, 3, 4}, {0, 1, 2, 3, 4}}};
  const EvalReport r = evaluate(s);
  EXPECT_EQ(r.accuracy_pct, 100.0);
  EXPECT_EQ(r.mae, 0.0);
}

TEST(GridSearch, TieRuleReturnsSmallestPair) {
  BroadbandTrace tr;
  tr.id = "zero";
  tr.act.assign(200, 0.0);
  tr.deact.assign(200, 0.0);
  tr.truth.assign(200, 0);
  const auto best = grid_search_thresholds({tr}, {0.5, 0.3, 0.1}, {0.9, 0.6}, DetectorConfig{}, 0.025);
  EXPECT_EQ(best.thr_act, 0.1);
  EXPECT_EQ(best.thr_deact, 0.6);
  EXPECT_EQ(best.accuracy_pct, 100.0);
  EXPECT_THROW(grid_search_thresholds({}, {0.1}, {0.2}, DetectorConfig{}, 0.025), UsageError);
  EXPECT_THROW(grid_search_thresholds({tr}, {}, {0.2}, DetectorConfig{}, 0.025), UsageError);
}

TEST(GridSearch, FindsSeparatingThreshold) {
  // Activation trace with one clear bump to 0.5; truth steps to 1 there.
  BroadbandTrace tr;
  tr.act.assign(300, 0.05);
  for (std::size_t t = 100; t < 160; ++t) tr.act[t] = 0.5;
  DetectorConfig base;
  base.enable_deactivation = false;
  DetectorConfig at = base;
  at.thr_act = 0.2;
  tr.truth = run_detector(tr, at, 0.025);
  ASSERT_EQ(tr.truth.back(), 1);
  const auto best = grid_search_thresholds({tr}, {0.02, 0.1, 0.2, 0.3, 0.6}, {0.3, 0.9}, base, 0.025);
  EXPECT_EQ(best.thr_act, 0.2);
  EXPECT_EQ(best.thr_deact, 0.3);  // dead parameter: smallest wins the tie
  EXPECT_EQ(best.accuracy_pct, 100.0);
}
