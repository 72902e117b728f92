// Copyright 2026 The kvswarm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string>
#include <vector>

#include "kvswarm/clustering.hpp"
#include "kvswarm/placement.hpp"

namespace kvswarm {

struct RetrievalRequest {
  std::vector<ClusterId> activated_clusters;
  std::vector<EntryId> dram_resident;
};

/// Union of the members of the activated clusters, minus DRAM-resident
/// entries. Sorted, no duplicates. Throws for unknown cluster ids.
std::vector<EntryId> merge_activated(const RetrievalRequest& req, const ClusterSet& cs);

/// Same as above with residency given as a per-entry mask; entries beyond the
/// mask are treated as not resident.
std::vector<EntryId> merge_activated(std::span<const ClusterId> activated, const ClusterSet& cs,
                                     const std::vector<bool>& dram_resident);

/// Per-cluster member reads without de-duplication: an entry shared by two
/// activated clusters is requested twice. Cluster order, then member order.
std::vector<EntryId> collect_requests(std::span<const ClusterId> activated, const ClusterSet& cs,
                                      const std::vector<bool>& dram_resident);

struct IoPlan {
  // Per-device read queue, in assignment order.
  std::vector<std::vector<EntryId>> buckets;

  std::size_t total() const noexcept;
  /// Submission batches: each pops the head of every non-empty bucket.
  std::vector<std::vector<EntryId>> batches() const;
};

enum class RoutePolicy {
  kBalanced,      // least-loaded device holding a replica (ties: lowest id)
  kFirstReplica,  // the replica written first, regardless of load
};

/// Routes each request to one device. Requests are visited in ascending
/// replication factor (distinct devices holding the entry), ties by lower id.
/// Duplicate requests are kept and routed independently.
/// Throws Error(kInconsistent) for an entry without replicas.
IoPlan schedule(std::span<const EntryId> requests, const PlacementMap& pm,
                RoutePolicy policy = RoutePolicy::kBalanced);

std::size_t max_load(const IoPlan& plan) noexcept;
std::size_t min_load(const IoPlan& plan) noexcept;

/// `bucket <device>: <comma-ids>` per device.
std::string dump(const IoPlan& plan);

}  // namespace kvswarm
