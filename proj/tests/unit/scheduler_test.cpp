// Copyright 2026 The kvswarm Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <random>
#include <set>

#include "../oracles.hpp"
#include "kvswarm/error.hpp"
#include "kvswarm/scheduler.hpp"

namespace kvswarm {
namespace {

constexpr EntryId a = 0, b = 1, c = 2;

TEST(Merge, UnionDeduplicatesReplicas) {
  ClusterSet cs(0.5, 3);
  const auto x = cs.add_cluster(a);
  cs.add_member(x, b, 0.1);
  const auto y = cs.add_cluster(b);
  cs.add_member(y, c, 0.1);
  EXPECT_EQ(merge_activated({{0, 1}, {}}, cs), (std::vector<EntryId>{a, b, c}));
}

TEST(Merge, FullyCached) {
  ClusterSet cs(0.5, 2);
  const auto x = cs.add_cluster(a);
  cs.add_member(x, b, 0.1);
  EXPECT_TRUE(merge_activated({{0}, {a, b}}, cs).empty());
}

TEST(Merge, MaskVariantAndCollectKeepsDuplicates) {
  ClusterSet cs(0.5, 3);
  const auto x = cs.add_cluster(a);
  cs.add_member(x, b, 0.1);
  const auto y = cs.add_cluster(c);
  cs.add_member(y, b, 0.1);
  const std::vector<ClusterId> act{0, 1};
  const std::vector<bool> mask{true, false, false};
  EXPECT_EQ(merge_activated(act, cs, mask), (std::vector<EntryId>{b, c}));
  EXPECT_EQ(collect_requests(act, cs, mask), (std::vector<EntryId>{b, c, b}));
  EXPECT_THROW(merge_activated({{5}, {}}, cs), Error);
}

TEST(Merge, MatchesSetAlgebraOnRandomInstances) {
  std::mt19937_64 rng(8);
  for (int round = 0; round < 500; ++round) {
    const std::size_t n = 1 + rng() % 20;
    ClusterSet cs(0.5, n);
    oracle::Clusters ref;
    const std::size_t k = 1 + rng() % 6;
    for (std::size_t i = 0; i < k; ++i) {
      const EntryId m = static_cast<EntryId>(rng() % n);
      const auto id = cs.add_cluster(m);
      std::vector<std::uint32_t> members{m};
      for (EntryId e = 0; e < n; ++e) {
        if (e != m && rng() % 3 == 0) {
          cs.add_member(id, e, 0.1);
          members.push_back(e);
        }
      }
      ref.push_back(members);
    }
    std::vector<ClusterId> act;
    std::vector<std::size_t> act_ref;
    for (std::size_t i = 0; i < k; ++i)
      if (rng() % 2) {
        act.push_back(static_cast<ClusterId>(i));
        act_ref.push_back(i);
      }
    std::vector<EntryId> dram;
    std::set<std::uint32_t> dram_ref;
    for (EntryId e = 0; e < n; ++e)
      if (rng() % 4 == 0) {
        dram.push_back(e);
        dram_ref.insert(e);
      }
    ASSERT_EQ(merge_activated({act, dram}, cs), oracle::merge(ref, act_ref, dram_ref));
  }
}

PlacementMap replicas(std::size_t n_disk, const std::vector<std::vector<DeviceId>>& where) {
  PlacementMap pm(n_disk, where.size());
  for (EntryId e = 0; e < where.size(); ++e)
    for (DeviceId d : where[e]) pm.append(e, d);
  return pm;
}

TEST(Schedule, HandTracedGreedy) {
  const auto pm = replicas(2, {{0}, {0, 1}, {0, 1}});
  const std::vector<EntryId> req{c, b, a};
  const auto plan = schedule(req, pm);
  EXPECT_EQ(plan.buckets[0], (std::vector<EntryId>{a, c}));
  EXPECT_EQ(plan.buckets[1], (std::vector<EntryId>{b}));
  EXPECT_EQ(dump(plan), "bucket 0: 0,2\nbucket 1: 1\n");
}

TEST(Schedule, SingleDeviceGivesSingletonBatches) {
  const auto pm = replicas(1, {{0}, {0}, {0}});
  const std::vector<EntryId> req{0, 1, 2};
  const auto plan = schedule(req, pm);
  EXPECT_EQ(plan.buckets[0].size(), 3u);
  const auto batches = plan.batches();
  ASSERT_EQ(batches.size(), 3u);
  for (const auto& batch : batches) EXPECT_EQ(batch.size(), 1u);
}

TEST(Schedule, FullyReplicatedBalancesPerfectly) {
  const auto pm = replicas(2, {{0, 1}, {0, 1}, {0, 1}, {0, 1}});
  const std::vector<EntryId> req{0, 1, 2, 3};
  const auto plan = schedule(req, pm);
  EXPECT_EQ(plan.buckets[0].size(), 2u);
  EXPECT_EQ(plan.buckets[1].size(), 2u);
}

TEST(Schedule, FirstReplicaIgnoresLoad) {
  const auto pm = replicas(2, {{0, 1}, {0, 1}, {0, 1}});
  const std::vector<EntryId> req{0, 1, 2};
  const auto plan = schedule(req, pm, RoutePolicy::kFirstReplica);
  EXPECT_EQ(plan.buckets[0].size(), 3u);
  EXPECT_TRUE(plan.buckets[1].empty());
}

TEST(Schedule, MissingReplicaIsInconsistent) {
  const auto pm = replicas(2, {{0}, {}});
  const std::vector<EntryId> req{1};
  try {
    schedule(req, pm);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInconsistent);
  }
}

TEST(Loads, MaxAndMin) {
  IoPlan plan{{{1, 2}, {3}}};
  EXPECT_EQ(max_load(plan), 2u);
  EXPECT_EQ(min_load(plan), 1u);
  EXPECT_EQ(plan.total(), 3u);
  EXPECT_EQ(max_load(IoPlan{}), 0u);
}

TEST(Schedule, WithinOneOfOptimal) {
  std::mt19937_64 rng(19);
  for (int round = 0; round < 400; ++round) {
    const std::size_t n_disk = 1 + rng() % 3;
    const std::size_t n = rng() % 11;
    std::vector<std::vector<DeviceId>> where(n);
    std::vector<std::vector<std::uint32_t>> allowed(n);
    for (std::size_t e = 0; e < n; ++e) {
      for (DeviceId d = 0; d < n_disk; ++d)
        if (rng() % 2) where[e].push_back(d);
      if (where[e].empty()) where[e].push_back(static_cast<DeviceId>(rng() % n_disk));
      allowed[e].assign(where[e].begin(), where[e].end());
    }
    std::vector<EntryId> req(n);
    std::iota(req.begin(), req.end(), 0u);
    const auto plan = schedule(req, replicas(n_disk, where));
    ASSERT_LE(max_load(plan), oracle::optimal_max_load(allowed, n_disk) + 1);
    for (DeviceId d = 0; d < n_disk; ++d)
      for (EntryId e : plan.buckets[d])
        ASSERT_TRUE(std::find(where[e].begin(), where[e].end(), d) != where[e].end());
  }
}

}  // namespace
}  // namespace kvswarm
