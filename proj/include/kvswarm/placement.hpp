// Copyright 2026 The kvswarm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <deque>
#include <span>
#include <vector>

#include "kvswarm/clustering.hpp"
#include "kvswarm/types.hpp"

namespace kvswarm {

struct DeviceSlot {
  DeviceId device = 0;
  std::uint32_t slot = 0;

  friend bool operator==(const DeviceSlot&, const DeviceSlot&) = default;
};

enum class StartPolicy {
  kGlobalPointer,  // wrap-around striping continued across clusters
  kSingleStart,    // every cluster starts at device 0 (imbalanced ablation)
};

/// Replica locations on SSD for every clustered entry.
///
/// Member k of cluster c lives on device (start(c) + k) mod n_disk, so a
/// cluster's stripe is recoverable from its start device alone.
class PlacementMap {
 public:
  PlacementMap() = default;
  PlacementMap(std::size_t n_disk, std::size_t n_entries,
               StartPolicy policy = StartPolicy::kGlobalPointer);

  std::size_t n_disk() const noexcept { return n_disk_; }
  StartPolicy start_policy() const noexcept { return policy_; }
  std::uint64_t global_pointer() const noexcept { return global_pointer_; }
  std::size_t entry_count() const noexcept { return locations_.size(); }
  std::size_t cluster_count() const noexcept { return cluster_start_.size(); }

  /// One slot per replica, in the order replicas were written.
  std::span<const DeviceSlot> locations(EntryId e) const;
  /// Distinct devices holding `e`, ascending.
  std::vector<DeviceId> devices_of(EntryId e) const;
  DeviceId cluster_start(ClusterId c) const;
  /// Entries written to device `d` so far.
  std::uint32_t device_fill(DeviceId d) const;

  /// Places all members of a new cluster `c` (which must equal cluster_count())
  /// and advances the global pointer by its size.
  void place_cluster(const Cluster& c);

  /// Writes one more member onto an existing cluster's stripe at position `k`.
  DeviceSlot extend_cluster(ClusterId c, std::size_t k, EntryId e);

  /// Writes `e` onto device `d` outside any cluster stripe.
  DeviceSlot append(EntryId e, DeviceId d);

  void grow_entries(std::size_t n_entries);

 private:
  std::size_t n_disk_ = 1;
  StartPolicy policy_ = StartPolicy::kGlobalPointer;
  std::uint64_t global_pointer_ = 0;
  std::vector<std::vector<DeviceSlot>> locations_;
  std::vector<DeviceId> cluster_start_;
  std::vector<std::uint32_t> fill_;
};

/// Stripes clusters in ascending id order.
PlacementMap place_clusters(const ClusterSet& cs, std::size_t n_disk,
                            StartPolicy policy = StartPolicy::kGlobalPointer);

/// Cluster-agnostic layout: entry e on device e mod n_disk.
PlacementMap place_sequential(std::size_t n_entries, std::size_t n_disk);

struct CacheScoreParams {
  double t_base_us = 10.0;
  double t_transfer_us = 3.0;
};

/// max(f, 0) * (t_base + s * t_transfer) / s. Throws for s == 0.
double cost_effectiveness(std::int64_t f, std::size_t s, const CacheScoreParams& p);

/// Greedy by descending score (ties: lower id); clusters that no longer fit
/// are skipped and the scan continues. Returned ids are in admission order.
std::vector<ClusterId> select_hot_clusters(const ClusterSet& cs, std::span<const std::int64_t> freqs,
                                           std::size_t budget_entries, const CacheScoreParams& p);

struct MedoidRow {
  EntryId medoid = 0;
  DeviceId start = 0;
};

struct DramPlan {
  std::vector<MedoidRow> medoid_index;  // indexed by cluster id
  std::size_t window_capacity = 0;
  std::deque<EntryId> window;           // oldest first
  std::vector<ClusterId> hot_cache;     // ascending
  std::size_t cache_budget_entries = 0;
};

/// Number of steps of `trace` in which each cluster was selected.
std::vector<std::int64_t> cluster_frequencies(const ClusterSet& cs, const ActivationTrace& trace,
                                              Selection selection = Selection::kOracle);

DramPlan build_dram_plan(const ClusterSet& cs, const PlacementMap& pm,
                         std::span<const std::int64_t> freqs, std::size_t window,
                         std::size_t budget_entries, const CacheScoreParams& p);

/// Sum of cluster sizes over `ids`.
std::size_t cluster_entries(const ClusterSet& cs, std::span<const ClusterId> ids);

}  // namespace kvswarm
