// Copyright 2026 The kvswarm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <list>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "kvswarm/clustering.hpp"
#include "kvswarm/placement.hpp"

namespace kvswarm {

// --- new-entry assignment --------------------------------------------------

/// Co-activation of freshly decoded entries with cluster medoids over their
/// first W steps.
class WindowStats {
 public:
  explicit WindowStats(std::size_t window);

  std::size_t window() const noexcept { return window_; }

  /// Starts observing `e`. Observing twice is an error.
  void track(EntryId e);
  bool tracking(EntryId e) const { return tracks_.count(e) != 0; }
  void forget(EntryId e) { tracks_.erase(e); }

  /// Records one decoding step for every tracked entry whose window is not
  /// yet full. `medoid_clusters` lists the clusters whose medoid is in
  /// `activated` (sorted).
  void observe(std::span<const EntryId> activated, std::span<const ClusterId> medoid_clusters);

  std::uint32_t observed(EntryId e) const;
  bool ready(EntryId e) const { return observed(e) >= window_; }
  std::uint32_t cooccur(EntryId e, ClusterId c) const;
  /// Tracked entries with a full window, ascending.
  std::vector<EntryId> ready_entries() const;

  /// Direct count injection, for tests and replay.
  void set(EntryId e, std::uint32_t observed, ClusterId c, std::uint32_t count);

 private:
  struct Track {
    std::uint32_t observed = 0;
    std::map<ClusterId, std::uint32_t> counts;
  };
  const Track& track_of(EntryId e) const;

  std::size_t window_;
  std::map<EntryId, Track> tracks_;
};

/// Clusters whose medoid appears in `activated` (sorted), ascending.
std::vector<ClusterId> clusters_with_active_medoid(const ClusterSet& cs,
                                                   std::span<const EntryId> activated);

/// 1 - f(e, medoid(c)) / W. Throws Error(kNotReady) before the window is full.
double new_entry_distance(const WindowStats& stats, EntryId e, ClusterId c);

struct Assignment {
  ClusterId cluster = 0;
  DeviceSlot slot;
  bool created = false;  // e became the medoid of a new singleton cluster
};

/// Appends `e` to cluster `c`, on the device continuing the cluster's stripe.
Assignment join_cluster(EntryId e, ClusterId c, double distance, ClusterSet& cs, PlacementMap& pm);

/// New singleton cluster around `e`, placed through the global pointer.
Assignment make_singleton(EntryId e, ClusterSet& cs, PlacementMap& pm);

/// Joins every cluster with new_entry_distance < tau; falls back to a
/// singleton cluster when none qualifies.
std::vector<Assignment> assign_new_entry(EntryId e, const WindowStats& stats, ClusterSet& cs,
                                         PlacementMap& pm, double tau);

enum class AssignPolicy {
  kWindowed,  // windowed medoid co-activation against the radius
  kMinSize,   // smallest cluster
  kMinDiff,   // nearest medoid by offline distance to the entry's first context
};

struct MaintainerOptions {
  std::size_t window = 256;
  double tau = 0.95;
  AssignPolicy policy = AssignPolicy::kWindowed;
};

/// Decode-time bookkeeping: new entries stay pending (DRAM-resident) until
/// their window fills, then are assigned under the configured policy.
class ClusterMaintainer {
 public:
  /// `offline` is required for kMinDiff; it covers the entries that existed
  /// when clustering ran.
  ClusterMaintainer(ClusterSet& cs, PlacementMap& pm, MaintainerOptions opts,
                    const DistanceMatrix* offline = nullptr);

  /// Registers entries appended by the current step.
  void add_entries(std::span<const EntryId> fresh);

  /// Feeds one step's activations and assigns every entry that matured.
  /// Returns (entry, assignments) in ascending entry order.
  std::vector<std::pair<EntryId, std::vector<Assignment>>> step(std::span<const EntryId> activated);

  bool pending(EntryId e) const { return stats_.tracking(e); }
  std::vector<EntryId> pending_entries() const;
  const WindowStats& stats() const noexcept { return stats_; }

 private:
  std::vector<Assignment> assign(EntryId e);
  ClusterId smallest_cluster() const;

  ClusterSet& cs_;
  PlacementMap& pm_;
  MaintainerOptions opts_;
  const DistanceMatrix* offline_;
  WindowStats stats_;
  // Offline-domain entries co-activated with a pending entry on its first activation.
  std::unordered_map<EntryId, std::vector<EntryId>> first_context_;
};

// --- hot-cluster cache -----------------------------------------------------

struct CacheState {
  std::vector<std::int64_t> freq;  // by cluster id; may go negative
  std::vector<ClusterId> heap;     // resident clusters, min-heap by score
};

/// freq += 1 for activated clusters, -= 1 for resident clusters that were not.
void update_frequencies(CacheState& state, std::span<const ClusterId> activated,
                        std::span<const ClusterId> resident);

struct Replacement {
  std::vector<ClusterId> admitted;
  std::vector<ClusterId> evicted;
};

/// Re-scores residents, then visits candidates by descending score (ties:
/// lower id). A candidate that fits is admitted; otherwise minimum-score
/// residents scoring strictly below it are evicted until it fits, and rolled
/// back if it still cannot.
Replacement cache_replace(CacheState& state, const ClusterSet& cs,
                          std::span<const ClusterId> candidates, std::size_t budget_entries,
                          const CacheScoreParams& p);

/// Resident-cluster policy driven once per decoding step.
class ClusterCache {
 public:
  virtual ~ClusterCache() = default;

  virtual bool contains(ClusterId c) const = 0;
  /// Applies one step's activated clusters (after hits were counted).
  virtual void access(std::span<const ClusterId> activated, const ClusterSet& cs) = 0;
  /// Evicts until the residents fit the budget again (clusters can grow).
  virtual void fit(const ClusterSet& cs) = 0;
  /// Resident clusters, ascending.
  virtual std::vector<ClusterId> residents() const = 0;
  virtual std::size_t budget_entries() const = 0;
};

/// Frequency feedback with cost-effectiveness ordering.
class ScoreCache final : public ClusterCache {
 public:
  ScoreCache(const ClusterSet& cs, std::vector<std::int64_t> freq,
             std::span<const ClusterId> initial, std::size_t budget_entries,
             const CacheScoreParams& p);

  bool contains(ClusterId c) const override;
  void access(std::span<const ClusterId> activated, const ClusterSet& cs) override;
  void fit(const ClusterSet& cs) override;
  std::vector<ClusterId> residents() const override;
  std::size_t budget_entries() const override { return budget_; }

  const CacheState& state() const noexcept { return state_; }

 private:
  void grow(std::size_t n_clusters);

  CacheState state_;
  std::vector<bool> resident_;
  std::size_t budget_;
  CacheScoreParams params_;
};

/// Least-recently-used baseline: every activated cluster that fits is admitted.
class LruCache final : public ClusterCache {
 public:
  LruCache(const ClusterSet& cs, std::span<const ClusterId> initial, std::size_t budget_entries);

  bool contains(ClusterId c) const override { return where_.count(c) != 0; }
  void access(std::span<const ClusterId> activated, const ClusterSet& cs) override;
  void fit(const ClusterSet& cs) override;
  std::vector<ClusterId> residents() const override;
  std::size_t budget_entries() const override { return budget_; }

 private:
  std::size_t used(const ClusterSet& cs) const;

  std::list<ClusterId> order_;  // most recent first
  std::unordered_map<ClusterId, std::list<ClusterId>::iterator> where_;
  std::size_t budget_;
};

struct HitStats {
  std::uint64_t hits = 0;
  std::uint64_t accesses = 0;
  double rate() const noexcept {
    return accesses == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(accesses);
  }
};

/// Replays a stream of per-step activated cluster sets through `cache`.
HitStats replay_cluster_stream(const ClusterSet& cs, std::span<const std::vector<ClusterId>> stream,
                               ClusterCache& cache);

}  // namespace kvswarm
