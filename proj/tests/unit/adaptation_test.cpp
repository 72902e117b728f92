// Copyright 2026 The kvswarm Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "kvswarm/adaptation.hpp"
#include "kvswarm/error.hpp"
#include "kvswarm/workload.hpp"

namespace kvswarm {
namespace {

ClusterSet sized(const std::vector<std::size_t>& sizes, std::size_t extra = 0) {
  std::size_t total = extra;
  for (auto s : sizes) total += s;
  ClusterSet cs(0.5, total);
  EntryId next = 0;
  for (auto s : sizes) {
    const auto id = cs.add_cluster(next++);
    for (std::size_t k = 1; k < s; ++k) cs.add_member(id, next++, 0.0);
  }
  return cs;
}

TEST(WindowDistance, AlwaysAndNever) {
  WindowStats st(4);
  st.set(10, 4, 0, 4);
  st.set(11, 4, 0, 0);
  EXPECT_DOUBLE_EQ(new_entry_distance(st, 10, 0), 0.0);
  EXPECT_DOUBLE_EQ(new_entry_distance(st, 11, 0), 1.0);
}

TEST(WindowDistance, PartialCooccurrence) {
  WindowStats st(8);
  st.set(3, 8, 1, 6);
  EXPECT_DOUBLE_EQ(new_entry_distance(st, 3, 1), 0.25);
}

TEST(WindowDistance, NotReadyBeforeTheWindowFills) {
  WindowStats st(8);
  st.set(3, 7, 1, 6);
  try {
    new_entry_distance(st, 3, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotReady);
  }
}

TEST(WindowStats, ObserveCountsMedoidCooccurrence) {
  WindowStats st(2);
  st.track(5);
  EXPECT_THROW(st.track(5), Error);
  const std::vector<ClusterId> meds{0, 2};
  st.observe(std::vector<EntryId>{1, 5}, meds);
  st.observe(std::vector<EntryId>{1}, meds);
  st.observe(std::vector<EntryId>{5}, meds);  // window already full
  EXPECT_EQ(st.observed(5), 2u);
  EXPECT_EQ(st.cooccur(5, 0), 1u);
  EXPECT_EQ(st.cooccur(5, 2), 1u);
  EXPECT_EQ(st.cooccur(5, 1), 0u);
  EXPECT_EQ(st.ready_entries(), (std::vector<EntryId>{5}));
}

TEST(Assign, ContinuesTheStripe) {
  // cluster 0 starts at device 0 (size 2), cluster 1 starts at device 2 (size 5)
  auto cs = sized({2, 5}, 1);
  auto pm = place_clusters(cs, 4);
  ASSERT_EQ(pm.cluster_start(1), 2u);
  WindowStats st(4);
  st.set(7, 4, 1, 4);
  const auto out = assign_new_entry(7, st, cs, pm, 0.5);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].cluster, 1u);
  EXPECT_EQ(out[0].slot.device, 3u);  // (2 + 5) mod 4
  EXPECT_EQ(cs.at(1).members.back(), 7u);
}

TEST(Assign, JoinsEveryQualifyingCluster) {
  auto cs = sized({2, 2}, 1);
  auto pm = place_clusters(cs, 2);
  WindowStats st(4);
  st.set(4, 4, 0, 4);
  st.set(4, 4, 1, 3);
  const auto out = assign_new_entry(4, st, cs, pm, 0.5);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(cs.replicas_of(4).size(), 2u);
  EXPECT_EQ(pm.locations(4).size(), 2u);
}

TEST(Assign, StrictThreshold) {
  auto cs = sized({2}, 1);
  auto pm = place_clusters(cs, 2);
  WindowStats st(4);
  st.set(2, 4, 0, 2);  // distance exactly 0.5
  const auto out = assign_new_entry(2, st, cs, pm, 0.5);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_TRUE(out[0].created);
}

TEST(Assign, SingletonFallback) {
  auto cs = sized({3}, 1);
  auto pm = place_clusters(cs, 2);
  WindowStats st(4);
  st.set(3, 4, 0, 0);
  const auto out = assign_new_entry(3, st, cs, pm, 0.5);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_TRUE(out[0].created);
  EXPECT_EQ(cs.size(), 2u);
  EXPECT_EQ(cs.at(1).medoid, 3u);
  EXPECT_EQ(out[0].slot.device, 1u);  // global pointer 3 mod 2
}

TEST(Maintainer, AssignsAfterTheWindow) {
  auto cs = sized({2, 2});
  auto pm = place_clusters(cs, 2);
  ClusterMaintainer m(cs, pm, {3, 0.5, AssignPolicy::kWindowed});
  cs.grow_entries(5);
  pm.grow_entries(5);
  m.add_entries(std::vector<EntryId>{4});
  EXPECT_TRUE(m.pending(4));
  EXPECT_TRUE(m.step(std::vector<EntryId>{0, 4}).empty());
  EXPECT_TRUE(m.step(std::vector<EntryId>{0, 4}).empty());
  const auto out = m.step(std::vector<EntryId>{2});
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].first, 4u);
  ASSERT_EQ(out[0].second.size(), 1u);
  EXPECT_EQ(out[0].second[0].cluster, 0u);  // 2 of 3 steps with medoid 0
  EXPECT_FALSE(m.pending(4));
}

TEST(Maintainer, MinSizePicksSmallestCluster) {
  auto cs = sized({3, 1, 1});
  auto pm = place_clusters(cs, 2);
  ClusterMaintainer m(cs, pm, {1, 0.5, AssignPolicy::kMinSize});
  cs.grow_entries(6);
  pm.grow_entries(6);
  m.add_entries(std::vector<EntryId>{5});
  const auto out = m.step(std::vector<EntryId>{0, 5});
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].second[0].cluster, 1u);
}

TEST(Frequencies, ActivatedUpOthersDown) {
  CacheState s;
  s.freq = {0, 0, 0};
  update_frequencies(s, std::vector<ClusterId>{1}, std::vector<ClusterId>{1, 2});
  EXPECT_EQ(s.freq, (std::vector<std::int64_t>{0, 1, -1}));
  update_frequencies(s, std::vector<ClusterId>{1, 2}, std::vector<ClusterId>{1, 2});
  EXPECT_EQ(s.freq, (std::vector<std::int64_t>{0, 2, 0}));
}

TEST(Replace, EmptyCacheAdmits) {
  const auto cs = sized({4});
  CacheState s;
  s.freq = {1};
  const auto r = cache_replace(s, cs, std::vector<ClusterId>{0}, 4, {100, 10});
  EXPECT_EQ(r.admitted, (std::vector<ClusterId>{0}));
  EXPECT_TRUE(r.evicted.empty());
}

TEST(Replace, LowerScoreCandidateChangesNothing) {
  const auto cs = sized({4, 4});
  CacheState s;
  s.freq = {5, 1};
  s.heap = {0};
  const auto r = cache_replace(s, cs, std::vector<ClusterId>{1}, 4, {100, 10});
  EXPECT_TRUE(r.admitted.empty());
  EXPECT_TRUE(r.evicted.empty());
  EXPECT_EQ(s.heap, (std::vector<ClusterId>{0}));
}

TEST(Replace, HigherScoreEvictsMinimum) {
  // size 1 clusters with t_base 0, t_transfer 100: score = 100 f
  const auto cs = sized({1, 1, 1});
  CacheState s;
  s.freq = {1, 2, 3};
  s.heap = {0, 1};
  const auto r = cache_replace(s, cs, std::vector<ClusterId>{2}, 2, {0, 100});
  EXPECT_EQ(r.admitted, (std::vector<ClusterId>{2}));
  EXPECT_EQ(r.evicted, (std::vector<ClusterId>{0}));
}

TEST(Replace, RollsBackWhenEvictionIsNotEnough) {
  const auto cs = sized({2, 2, 3});
  CacheState s;
  s.freq = {1, 50, 40};
  s.heap = {0, 1};
  const auto r = cache_replace(s, cs, std::vector<ClusterId>{2}, 4, {0, 1});
  EXPECT_TRUE(r.admitted.empty());
  EXPECT_TRUE(r.evicted.empty());
  auto heap = s.heap;
  std::sort(heap.begin(), heap.end());
  EXPECT_EQ(heap, (std::vector<ClusterId>{0, 1}));
}

TEST(ScoreCache, ConvergesToTheStationaryHotSet) {
  // Clusters 0..3 fire every step, 4..7 once every fourth step, 8..15 never.
  std::vector<std::size_t> sizes(16, 4);
  const auto cs = sized(sizes);
  std::vector<std::vector<ClusterId>> stream;
  for (int t = 0; t < 40; ++t) {
    std::vector<ClusterId> s{0, 1, 2, 3};
    if (t % 4 == 0) s.insert(s.end(), {4, 5, 6, 7});
    stream.push_back(s);
  }
  // start from the cold clusters
  const std::vector<ClusterId> cold{8, 9, 10, 11};
  ScoreCache cache(cs, std::vector<std::int64_t>(16, 0), cold, 16, {10, 3});
  replay_cluster_stream(cs, stream, cache);
  EXPECT_EQ(cache.residents(), (std::vector<ClusterId>{0, 1, 2, 3}));
}

TEST(LruCache, AdmitsEveryFittingActivation) {
  const auto cs = sized({2, 2, 2});
  LruCache lru(cs, {}, 4);
  lru.access(std::vector<ClusterId>{0}, cs);
  lru.access(std::vector<ClusterId>{1}, cs);
  lru.access(std::vector<ClusterId>{2}, cs);
  EXPECT_EQ(lru.residents(), (std::vector<ClusterId>{1, 2}));
}

}  // namespace
}  // namespace kvswarm
