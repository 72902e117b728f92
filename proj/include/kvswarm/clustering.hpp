// Copyright 2026 The kvswarm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "kvswarm/trace.hpp"
#include "kvswarm/types.hpp"

namespace kvswarm {

struct Cluster {
  ClusterId id = 0;
  EntryId medoid = 0;
  // Medoid first, then insertion order.
  std::vector<EntryId> members;
  // Average distance to the members present when each member was admitted.
  // Empty for clusters read back from a file.
  std::vector<double> admission_distance;
};

/// Medoid-anchored clusters over one layer; an entry may belong to several.
class ClusterSet {
 public:
  ClusterSet() = default;
  ClusterSet(double tau, std::size_t n_entries);

  double tau() const noexcept { return tau_; }
  std::size_t entry_count() const noexcept { return replication_.size(); }
  std::size_t size() const noexcept { return clusters_.size(); }
  const std::vector<Cluster>& clusters() const noexcept { return clusters_; }
  const Cluster& at(ClusterId id) const;

  /// Ids of the clusters containing `e`, ascending.
  std::span<const ClusterId> replicas_of(EntryId e) const;
  std::size_t total_members() const noexcept { return total_members_; }

  ClusterId add_cluster(EntryId medoid);
  void add_member(ClusterId id, EntryId e, double admission_distance);

  /// Extends the entry domain (decode-time growth); never shrinks.
  void grow_entries(std::size_t n_entries);

  /// Throws Error(kInconsistent) unless every entry in `entries` is covered.
  void check_coverage(std::span<const EntryId> entries) const;

 private:
  double tau_ = 0.0;
  std::vector<Cluster> clusters_;
  std::vector<std::vector<ClusterId>> replication_;
  std::size_t total_members_ = 0;
};

/// rho[e] = |{ j != e : dist(e, j) <= tau }|, indexed like `entries`.
std::vector<std::uint32_t> coactivation_density(std::span<const EntryId> entries,
                                                const DistanceMatrix& dist, double tau);
std::vector<std::uint32_t> coactivation_density(const DistanceMatrix& dist, double tau);

struct ClusteringOptions {
  double tau = 0.5;
  // Entries already in this many clusters are no longer admitted. Unset means unlimited.
  std::optional<std::size_t> max_replicas;
};

/// Density-ordered medoid selection with greedy average-linkage expansion.
///
/// Medoids are taken in descending density (ties: lower id), skipping covered
/// entries. Candidates within `tau` of the medoid are visited in ascending
/// distance (ties: lower id) and admitted when their mean distance to the
/// current members is <= tau. Covered entries stay eligible as candidates,
/// which is where replicas come from.
ClusterSet build_clusters(std::span<const EntryId> entries, const DistanceMatrix& dist,
                          const ClusteringOptions& options);
ClusterSet build_clusters(const DistanceMatrix& dist, const ClusteringOptions& options);

/// Per-cluster mean distance from non-medoid members to the medoid (0 for singletons).
std::vector<double> cluster_quality(const ClusterSet& cs, const DistanceMatrix& dist);

/// Mean member-to-medoid distance pooled over all non-medoid memberships.
double pooled_member_distance(const ClusterSet& cs, const DistanceMatrix& dist);

struct ReplicationStats {
  std::size_t covered_entries = 0;
  std::size_t replicated_entries = 0;  // in two or more clusters
  std::size_t max_replication = 0;
  double mean_replication = 0.0;  // memberships per covered entry
};

ReplicationStats replication_stats(const ClusterSet& cs);

/// How a decoding step decides which clusters it needs.
enum class Selection {
  kOracle,  // clusters with at least one activated member
  kMedoid,  // clusters whose medoid is activated
};

/// Clusters selected by `activated` (sorted entry ids), ascending.
/// Entries outside the cluster set's domain are ignored.
std::vector<ClusterId> activated_clusters(const ClusterSet& cs, std::span<const EntryId> activated,
                                          Selection selection = Selection::kOracle);

}  // namespace kvswarm
