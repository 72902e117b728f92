// Copyright 2026 The kvswarm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "kvswarm/clustering.hpp"
#include "kvswarm/trace.hpp"

namespace kvswarm {

/// Synthetic trace with planted co-activation groups.
///
/// `steps` profiling steps append nothing; then `decode_steps` steps each
/// append `new_per_step` entries; then `tail_steps` more steps append nothing.
struct PlantedSpec {
  std::size_t n_entries = 1024;
  std::size_t n_groups = 16;
  double group_overlap = 0.0;  // share of group g+1's head that group g also owns
  double sparsity = 0.10;      // activated fraction of the current entries per step
  double noise = 0.02;         // chance an activated entry is swapped for a uniform one
  std::size_t steps = 2000;
  std::size_t decode_steps = 0;
  std::size_t new_per_step = 1;
  std::size_t tail_steps = 0;
  double zipf = 1.0;  // primary-group popularity exponent; 0 is uniform
  std::uint64_t seed = 1;

  /// Throws Error(kInvalidArgument) on out-of-range fields.
  void validate() const;
};

struct PlantedTrace {
  ActivationTrace trace;
  // Final membership of every planted group, ascending ids.
  std::vector<std::vector<EntryId>> groups;
};

/// Each step activates a Zipf-chosen primary group, then uniformly chosen
/// companion groups until round(sparsity * entries) entries are active (the
/// last group is cut to a random subset), then applies noise. Entries
/// appended during decode join a uniformly chosen group and become
/// activatable from the following step.
PlantedTrace generate(const PlantedSpec& spec);

/// Mean over planted groups of the best Jaccard similarity with any cluster.
double set_agreement(const std::vector<std::vector<EntryId>>& groups, const ClusterSet& cs);

/// Disjoint clusters with log-uniform sizes and a Zipf activation stream of
/// one or two clusters per step.
struct ClusterStreamSpec {
  std::size_t n_clusters = 64;
  std::size_t min_size = 8;
  std::size_t max_size = 256;
  std::size_t steps = 4000;
  double zipf = 1.0;
  double second_cluster = 0.5;  // chance a step activates a second cluster
  std::uint64_t seed = 1;
};

struct ClusterStream {
  ClusterSet clusters;
  std::vector<std::vector<ClusterId>> steps;  // each sorted, no duplicates
};

ClusterStream generate_cluster_stream(const ClusterStreamSpec& spec);

}  // namespace kvswarm
