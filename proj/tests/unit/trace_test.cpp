// Copyright 2026 The kvswarm Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <random>

#include "../oracles.hpp"
#include "kvswarm/error.hpp"
#include "kvswarm/trace.hpp"

namespace kvswarm {
namespace {

ActivationTrace make_trace(std::size_t n, std::vector<std::vector<EntryId>> acts) {
  std::vector<ActivationStep> steps;
  for (auto& a : acts) steps.push_back({std::move(a), {}});
  return ActivationTrace(n, std::move(steps));
}

TEST(Adjacency, CountsPairsPerStep) {
  // entries 1..3 of a 4-entry trace; steps {1,2},{1,2},{1,3}
  const auto adj = build_adjacency(make_trace(4, {{1, 2}, {1, 2}, {1, 3}}));
  EXPECT_EQ(adj.count(1, 2), 2u);
  EXPECT_EQ(adj.count(2, 1), 2u);
  EXPECT_EQ(adj.count(1, 3), 1u);
  EXPECT_EQ(adj.count(2, 3), 0u);
  EXPECT_EQ(adj.ordered_total(), 6u);
}

TEST(Adjacency, SingletonStepsGiveZeroMatrix) {
  const auto adj = build_adjacency(make_trace(3, {{0}, {1}, {2}, {0}}));
  for (EntryId i = 0; i < 3; ++i)
    for (EntryId j = 0; j < 3; ++j) EXPECT_EQ(adj.count(i, j), 0u);
  EXPECT_EQ(adj.ordered_total(), 0u);
}

TEST(Adjacency, FullStepCountsEveryPairOnce) {
  const auto adj = build_adjacency(make_trace(5, {{0, 1, 2, 3, 4}}));
  for (EntryId i = 0; i < 5; ++i)
    for (EntryId j = 0; j < 5; ++j) EXPECT_EQ(adj.count(i, j), i == j ? 0u : 1u);
}

TEST(Adjacency, MatchesBruteForceDenseAndSparse) {
  std::mt19937_64 rng(11);
  for (int round = 0; round < 50; ++round) {
    const std::size_t n = 2 + rng() % 30;
    std::vector<std::vector<EntryId>> acts;
    for (int t = 0; t < 40; ++t) {
      std::vector<EntryId> s;
      for (EntryId e = 0; e < n; ++e)
        if (rng() % 4 == 0) s.push_back(e);
      acts.push_back(s);
    }
    const auto trace = make_trace(n, acts);
    const auto ref = oracle::pair_counts(n, acts);
    const auto dense = build_adjacency(trace);
    AdjacencyMatrix sparse(n, /*dense_limit=*/0);
    for (const auto& s : trace.steps())
      for (std::size_t a = 0; a < s.activated.size(); ++a)
        for (std::size_t b = a + 1; b < s.activated.size(); ++b) sparse.increment(s.activated[a], s.activated[b]);
    ASSERT_FALSE(sparse.is_dense());
    for (EntryId i = 0; i < n; ++i)
      for (EntryId j = 0; j < n; ++j) {
        ASSERT_EQ(dense.count(i, j), ref[i][j]);
        ASSERT_EQ(sparse.count(i, j), ref[i][j]);
      }
    EXPECT_EQ(sparse.ordered_total(), dense.ordered_total());
  }
}

TEST(Probability, OrderedPairDenominator) {
  const auto adj = build_adjacency(make_trace(4, {{1, 2}, {1, 2}, {1, 3}}));
  EXPECT_NEAR(coactivation_probability(adj, 1, 2), 2.0 / 6.0, 1e-12);
  EXPECT_NEAR(coactivation_probability(adj, 2, 1), 2.0 / 6.0, 1e-12);
}

TEST(Probability, TwoEntriesFiveSteps) {
  const auto adj = build_adjacency(make_trace(2, {{0, 1}, {0, 1}, {0, 1}, {0, 1}, {0, 1}}));
  EXPECT_EQ(adj.count(0, 1), 5u);
  EXPECT_DOUBLE_EQ(coactivation_probability(adj, 0, 1), 0.5);
}

TEST(Probability, ZeroMatrixIsAnError) {
  const auto adj = build_adjacency(make_trace(3, {{0}, {1}}));
  try {
    coactivation_probability(adj, 0, 1);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kZeroDenominator);
  }
  EXPECT_THROW(build_distance_matrix(adj), Error);
}

TEST(Distance, ComplementOfProbability) {
  const auto adj = build_adjacency(make_trace(4, {{1, 2}, {1, 2}, {1, 3}}));
  const auto d = build_distance_matrix(adj);
  EXPECT_NEAR(d(1, 2), 1.0 - 2.0 / 6.0, 1e-12);
  EXPECT_DOUBLE_EQ(d(2, 3), 1.0);  // never co-activated
  EXPECT_DOUBLE_EQ(d(0, 3), 1.0);
  for (EntryId i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(d(i, i), 0.0);
}

TEST(Distance, DerivedMatchesDense) {
  std::mt19937_64 rng(5);
  std::vector<std::vector<EntryId>> acts;
  for (int t = 0; t < 30; ++t) {
    std::vector<EntryId> s;
    for (EntryId e = 0; e < 12; ++e)
      if (rng() % 3 == 0) s.push_back(e);
    acts.push_back(s);
  }
  const auto adj = build_adjacency(make_trace(12, acts));
  const auto dense = build_distance_matrix(adj);
  const auto lazy = DistanceMatrix::derived(std::make_shared<AdjacencyMatrix>(adj),
                                            static_cast<double>(adj.ordered_total()));
  for (EntryId i = 0; i < 12; ++i)
    for (EntryId j = 0; j < 12; ++j) EXPECT_NEAR(dense(i, j), lazy(i, j), 1e-12);
}

TEST(Distance, RowMaxNormalization) {
  const auto adj = build_adjacency(make_trace(4, {{1, 2}, {1, 2}, {1, 3}}));
  const auto d = build_distance_matrix(adj, Normalization::kRowMax);
  EXPECT_DOUBLE_EQ(d(1, 2), 0.0);
  EXPECT_DOUBLE_EQ(d(1, 3), 0.5);
}

TEST(Calibration, RadiusAdmitsExactlyTheCountThreshold) {
  const auto adj = build_adjacency(make_trace(4, {{1, 2}, {1, 2}, {1, 3}}));
  const auto d = build_distance_matrix(adj);
  const double tau = tau_for_min_count(adj, 2.0);
  EXPECT_LE(d(1, 2), tau);
  EXPECT_GT(d(1, 3), tau);
}

TEST(Trace, RejectsStaleNewEntriesAndUnknownActivations) {
  EXPECT_THROW(ActivationTrace(3, {{{0}, {2}}}), Error);  // new entry must be 3
  EXPECT_THROW(ActivationTrace(3, {{{3}, {}}}), Error);   // entry 3 does not exist
  const ActivationTrace ok(3, {{{0, 1}, {}}, {{3}, {3, 4}}, {{0}, {}}});
  EXPECT_EQ(ok.entry_count(), 5u);
  EXPECT_EQ(ok.prefill_steps(), 1u);
  EXPECT_EQ(ok.entries_at(0), 3u);
  EXPECT_EQ(ok.entries_at(1), 5u);
  EXPECT_EQ(ok.prefix(1).entry_count(), 3u);
}

TEST(Trace, SortsAndDeduplicatesActivations) {
  const ActivationTrace t(4, {{{3, 1, 1, 0}, {}}});
  EXPECT_EQ(t.steps()[0].activated, (std::vector<EntryId>{0, 1, 3}));
}

TEST(OverlapDistance, UsesRarerEntryCount) {
  // 0 active 4 times, 1 active twice, always with 0
  const auto d = build_overlap_distance_matrix(make_trace(3, {{0, 1}, {0, 1}, {0}, {0}}));
  EXPECT_DOUBLE_EQ(d(0, 1), 0.0);
  EXPECT_DOUBLE_EQ(d(0, 2), 1.0);
}

}  // namespace
}  // namespace kvswarm
