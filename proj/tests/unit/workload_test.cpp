// Copyright 2026 The kvswarm Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "kvswarm/error.hpp"
#include "kvswarm/formats.hpp"
#include "kvswarm/workload.hpp"

namespace kvswarm {
namespace {

TEST(Generate, CleanGroupsAreRecoveredExactly) {
  PlantedSpec spec;
  spec.n_entries = 256;
  spec.n_groups = 8;
  spec.noise = 0.0;
  spec.sparsity = 0.125;  // one full group per step
  spec.steps = 800;
  spec.seed = 9;
  const auto pt = generate(spec);
  const auto adj = build_adjacency(pt.trace);
  // block-diagonal: pairs across groups never co-occur
  for (EntryId i = 0; i < 256; i += 7)
    for (EntryId j = 0; j < 256; j += 5)
      if (i / 32 != j / 32) ASSERT_EQ(adj.count(i, j), 0u);
  const auto cs = build_clusters(build_distance_matrix(adj), {tau_for_min_count(adj, 1.0), std::nullopt});
  EXPECT_EQ(cs.size(), 8u);
  EXPECT_DOUBLE_EQ(set_agreement(pt.groups, cs), 1.0);
}

TEST(Generate, PureNoiseGivesNearSingletons) {
  PlantedSpec spec;
  spec.n_entries = 256;
  spec.n_groups = 8;
  spec.noise = 1.0;
  spec.steps = 800;
  spec.seed = 9;
  const auto pt = generate(spec);
  const auto adj = build_adjacency(pt.trace);
  // same radius that recovers planted groups at 5% co-activation
  const auto cs = build_clusters(build_distance_matrix(adj), {tau_for_min_count(adj, 0.05 * 800), std::nullopt});
  EXPECT_GT(cs.size(), 200u);
  EXPECT_LT(set_agreement(pt.groups, cs), 0.2);
}

TEST(Generate, SameSeedSameBytes) {
  PlantedSpec spec;
  spec.n_entries = 128;
  spec.n_groups = 4;
  spec.decode_steps = 5;
  spec.new_per_step = 3;
  spec.steps = 50;
  spec.seed = 123;
  EXPECT_EQ(write_trace(generate(spec).trace, "x"), write_trace(generate(spec).trace, "x"));
  spec.seed = 124;
  PlantedSpec other = spec;
  other.seed = 123;
  EXPECT_NE(write_trace(generate(spec).trace, "x"), write_trace(generate(other).trace, "x"));
}

TEST(Generate, DecodeStepsAppendEntries) {
  PlantedSpec spec;
  spec.n_entries = 64;
  spec.n_groups = 4;
  spec.steps = 10;
  spec.decode_steps = 4;
  spec.new_per_step = 2;
  spec.tail_steps = 3;
  const auto pt = generate(spec);
  EXPECT_EQ(pt.trace.step_count(), 17u);
  EXPECT_EQ(pt.trace.entry_count(), 72u);
  EXPECT_EQ(pt.trace.prefill_steps(), 10u);
  for (std::size_t t = 10; t < 14; ++t) {
    for (EntryId e : pt.trace.steps()[t].new_entries) {
      const auto& act = pt.trace.steps()[t].activated;
      EXPECT_FALSE(std::binary_search(act.begin(), act.end(), e));  // not activatable yet
    }
  }
  std::size_t members = 0;
  for (const auto& g : pt.groups) members += g.size();
  EXPECT_EQ(members, 72u);
}

TEST(Generate, OverlapSharesTheNextGroupHead) {
  PlantedSpec spec;
  spec.n_entries = 40;
  spec.n_groups = 4;
  spec.group_overlap = 0.2;
  spec.steps = 5;
  const auto pt = generate(spec);
  EXPECT_EQ(pt.groups[0], (std::vector<EntryId>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11}));
  EXPECT_EQ(pt.groups[3].size(), 10u);
}

TEST(Generate, SparsityControlsActivationCount) {
  PlantedSpec spec;
  spec.n_entries = 1000;
  spec.n_groups = 10;
  spec.sparsity = 0.05;
  spec.steps = 20;
  const auto pt = generate(spec);
  for (const auto& s : pt.trace.steps()) EXPECT_EQ(s.activated.size(), 50u);
}

TEST(Generate, ValidatesSpec) {
  PlantedSpec spec;
  spec.sparsity = 0.0;
  EXPECT_THROW(generate(spec), Error);
  spec = {};
  spec.n_groups = 0;
  EXPECT_THROW(generate(spec), Error);
  spec = {};
  spec.noise = 1.5;
  EXPECT_THROW(spec.validate(), Error);
}

TEST(ClusterStream, ZipfRanksFollowIds) {
  ClusterStreamSpec spec;
  spec.steps = 4000;
  const auto st = generate_cluster_stream(spec);
  std::vector<int> counts(spec.n_clusters, 0);
  for (const auto& s : st.steps) {
    ASSERT_TRUE(std::is_sorted(s.begin(), s.end()));
    for (auto c : s) counts[c]++;
  }
  EXPECT_GT(counts[0], counts[10]);
  EXPECT_GT(counts[1], counts[40]);
  for (const auto& c : st.clusters.clusters()) {
    EXPECT_GE(c.members.size(), spec.min_size);
    EXPECT_LE(c.members.size(), spec.max_size);
  }
}

TEST(Agreement, BestMatchJaccard) {
  ClusterSet cs(0.5, 6);
  const auto a = cs.add_cluster(0);
  cs.add_member(a, 1, 0);
  const auto b = cs.add_cluster(2);
  cs.add_member(b, 3, 0);
  cs.add_member(b, 4, 0);
  const std::vector<std::vector<EntryId>> groups{{0, 1}, {2, 3, 4, 5}};
  EXPECT_DOUBLE_EQ(set_agreement(groups, cs), (1.0 + 0.75) / 2);
}

}  // namespace
}  // namespace kvswarm
