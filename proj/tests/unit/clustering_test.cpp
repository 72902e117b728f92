// Copyright 2026 The kvswarm Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <random>

#include "../oracles.hpp"
#include "kvswarm/clustering.hpp"
#include "kvswarm/error.hpp"

namespace kvswarm {
namespace {

DistanceMatrix uniform(std::size_t n, double d) {
  DistanceMatrix m(n, d);
  return m;
}

DistanceMatrix from_rows(const oracle::Matrix& rows) {
  const std::size_t n = rows.size();
  std::vector<double> flat;
  for (const auto& r : rows) flat.insert(flat.end(), r.begin(), r.end());
  return DistanceMatrix::from_dense(n, std::move(flat));
}

TEST(Density, CompleteNeighborhood) {
  const auto d = uniform(3, 0.2);
  EXPECT_EQ(coactivation_density(d, 0.5), (std::vector<std::uint32_t>{2, 2, 2}));
}

TEST(Density, EmptyNeighborhoods) {
  EXPECT_EQ(coactivation_density(uniform(4, 1.0), 0.5), (std::vector<std::uint32_t>(4, 0)));
}

TEST(Density, HandCountedThresholds) {
  const auto d = from_rows({{0, 0.3, 0.6}, {0.3, 0, 0.4}, {0.6, 0.4, 0}});
  EXPECT_EQ(coactivation_density(d, 0.5), (std::vector<std::uint32_t>{1, 2, 1}));
}

TEST(BuildClusters, AllZeroDistancesGiveOneCluster) {
  const auto cs = build_clusters(uniform(4, 0.0), {0.5, std::nullopt});
  ASSERT_EQ(cs.size(), 1u);
  EXPECT_EQ(cs.at(0).medoid, 0u);
  EXPECT_EQ(cs.at(0).members, (std::vector<EntryId>{0, 1, 2, 3}));
}

TEST(BuildClusters, FarApartGivesSingletons) {
  const auto cs = build_clusters(uniform(5, 1.0), {0.5, std::nullopt});
  ASSERT_EQ(cs.size(), 5u);
  for (ClusterId c = 0; c < 5; ++c) EXPECT_EQ(cs.at(c).members, (std::vector<EntryId>{c}));
}

TEST(BuildClusters, InterleavedPairReplicatesTheHub) {
  // A=0 close to B=1 and C=2; B and C far apart.
  const auto d = from_rows({{0, 0.1, 0.1}, {0.1, 0, 0.9}, {0.1, 0.9, 0}});
  const auto cs = build_clusters(d, {0.3, std::nullopt});
  ASSERT_EQ(cs.size(), 2u);
  std::vector<std::vector<EntryId>> sets;
  for (const auto& c : cs.clusters()) {
    auto m = c.members;
    std::sort(m.begin(), m.end());
    sets.push_back(m);
  }
  std::sort(sets.begin(), sets.end());
  EXPECT_EQ(sets, (std::vector<std::vector<EntryId>>{{0, 1}, {0, 2}}));
  EXPECT_EQ(cs.replicas_of(0).size(), 2u);
}

TEST(BuildClusters, MaxReplicasCapsMembership) {
  const auto d = from_rows({{0, 0.1, 0.1}, {0.1, 0, 0.9}, {0.1, 0.9, 0}});
  const auto cs = build_clusters(d, {0.3, 1});
  EXPECT_EQ(cs.replicas_of(0).size(), 1u);
  cs.check_coverage(std::vector<EntryId>{0, 1, 2});
}

TEST(BuildClusters, MatchesReferenceOnRandomMatrices) {
  std::mt19937_64 rng(2024);
  for (int round = 0; round < 300; ++round) {
    const std::size_t n = 1 + rng() % 10;
    const auto rows = oracle::random_matrix(n, rng);
    for (double tau : {0.3, 0.5, 0.7}) {
      const auto cs = build_clusters(from_rows(rows), {tau, std::nullopt});
      const auto ref = oracle::build_clusters(rows, tau);
      ASSERT_EQ(cs.size(), ref.size());
      for (std::size_t c = 0; c < ref.size(); ++c) ASSERT_EQ(cs.at(c).members, ref[c]);
    }
  }
}

TEST(BuildClusters, CoversEveryEntry) {
  std::mt19937_64 rng(3);
  for (int round = 0; round < 100; ++round) {
    const std::size_t n = 1 + rng() % 20;
    const auto cs = build_clusters(from_rows(oracle::random_matrix(n, rng)), {0.4, std::nullopt});
    std::vector<EntryId> all(n);
    std::iota(all.begin(), all.end(), 0u);
    EXPECT_NO_THROW(cs.check_coverage(all));
  }
}

TEST(BuildClusters, SubsetOfEntries) {
  const auto cs = build_clusters(std::vector<EntryId>{1, 3}, uniform(5, 0.0), {0.5, std::nullopt});
  ASSERT_EQ(cs.size(), 1u);
  EXPECT_EQ(cs.at(0).members, (std::vector<EntryId>{1, 3}));
  EXPECT_TRUE(cs.replicas_of(0).empty());
}

TEST(Quality, SingletonIsZero) {
  ClusterSet cs(0.5, 3);
  cs.add_cluster(1);
  EXPECT_EQ(cluster_quality(cs, uniform(3, 0.7)), (std::vector<double>{0.0}));
}

TEST(Quality, MeanMemberToMedoid) {
  const auto d = from_rows({{0, 0.2, 0.4}, {0.2, 0, 0.9}, {0.4, 0.9, 0}});
  ClusterSet cs(0.5, 3);
  const auto id = cs.add_cluster(0);
  cs.add_member(id, 1, 0.2);
  cs.add_member(id, 2, 0.3);
  EXPECT_NEAR(cluster_quality(cs, d)[0], 0.3, 1e-12);
  EXPECT_NEAR(pooled_member_distance(cs, d), 0.3, 1e-12);
}

TEST(ClusterSet, RejectsDuplicatesAndUnknownEntries) {
  ClusterSet cs(0.5, 3);
  const auto id = cs.add_cluster(0);
  cs.add_member(id, 2, 0.1);
  EXPECT_THROW(cs.add_member(id, 2, 0.1), Error);
  EXPECT_THROW(cs.add_member(id, 0, 0.1), Error);
  EXPECT_THROW(cs.add_member(id, 3, 0.1), Error);
  EXPECT_THROW(cs.check_coverage(std::vector<EntryId>{1}), Error);
}

TEST(ReplicationStats, CountsSharedEntries) {
  ClusterSet cs(0.5, 4);
  const auto a = cs.add_cluster(0);
  cs.add_member(a, 1, 0.1);
  const auto b = cs.add_cluster(2);
  cs.add_member(b, 1, 0.1);
  cs.add_member(b, 3, 0.1);
  const auto s = replication_stats(cs);
  EXPECT_EQ(s.covered_entries, 4u);
  EXPECT_EQ(s.replicated_entries, 1u);
  EXPECT_EQ(s.max_replication, 2u);
  EXPECT_DOUBLE_EQ(s.mean_replication, 5.0 / 4.0);
}

TEST(Selection, OracleAndMedoid) {
  ClusterSet cs(0.5, 5);
  const auto a = cs.add_cluster(0);
  cs.add_member(a, 1, 0.1);
  const auto b = cs.add_cluster(2);
  cs.add_member(b, 1, 0.1);
  cs.add_member(b, 3, 0.1);
  const std::vector<EntryId> act{1, 4};
  EXPECT_EQ(activated_clusters(cs, act, Selection::kOracle), (std::vector<ClusterId>{0, 1}));
  EXPECT_TRUE(activated_clusters(cs, act, Selection::kMedoid).empty());
  const std::vector<EntryId> act2{2};
  EXPECT_EQ(activated_clusters(cs, act2, Selection::kMedoid), (std::vector<ClusterId>{1}));
}

}  // namespace
}  // namespace kvswarm
