// Copyright 2026 The kvswarm Authors
// SPDX-License-Identifier: Apache-2.0

#include "kvswarm/placement.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "kvswarm/error.hpp"

namespace kvswarm {

PlacementMap::PlacementMap(std::size_t n_disk, std::size_t n_entries, StartPolicy policy)
    : n_disk_(n_disk), policy_(policy), locations_(n_entries), fill_(n_disk, 0) {
  KVSWARM_CHECK(n_disk >= 1, ErrorCode::kInvalidArgument, "need at least one device");
}

std::span<const DeviceSlot> PlacementMap::locations(EntryId e) const {
  if (e >= locations_.size()) return {};
  return locations_[e];
}

std::vector<DeviceId> PlacementMap::devices_of(EntryId e) const {
  std::vector<DeviceId> devs;
  for (const auto& s : locations(e)) devs.push_back(s.device);
  std::sort(devs.begin(), devs.end());
  devs.erase(std::unique(devs.begin(), devs.end()), devs.end());
  return devs;
}

DeviceId PlacementMap::cluster_start(ClusterId c) const {
  KVSWARM_CHECK(c < cluster_start_.size(), ErrorCode::kInvalidArgument,
                "cluster " + std::to_string(c) + " has no placement");
  return cluster_start_[c];
}

std::uint32_t PlacementMap::device_fill(DeviceId d) const {
  KVSWARM_CHECK(d < n_disk_, ErrorCode::kInvalidArgument, "device id out of range");
  return fill_[d];
}

DeviceSlot PlacementMap::append(EntryId e, DeviceId d) {
  KVSWARM_CHECK(d < n_disk_, ErrorCode::kInvalidArgument, "device id out of range");
  if (e >= locations_.size()) locations_.resize(static_cast<std::size_t>(e) + 1);
  const DeviceSlot slot{d, fill_[d]++};
  locations_[e].push_back(slot);
  return slot;
}

void PlacementMap::place_cluster(const Cluster& c) {
  KVSWARM_CHECK(c.id == cluster_start_.size(), ErrorCode::kInvalidArgument,
                "clusters must be placed in ascending id order");
  const auto start = policy_ == StartPolicy::kGlobalPointer
                         ? static_cast<DeviceId>(global_pointer_ % n_disk_)
                         : DeviceId{0};
  cluster_start_.push_back(start);
  for (std::size_t k = 0; k < c.members.size(); ++k) {
    append(c.members[k], static_cast<DeviceId>((start + k) % n_disk_));
  }
  global_pointer_ += c.members.size();
}

DeviceSlot PlacementMap::extend_cluster(ClusterId c, std::size_t k, EntryId e) {
  const DeviceId start = cluster_start(c);
  return append(e, static_cast<DeviceId>((start + k) % n_disk_));
}

void PlacementMap::grow_entries(std::size_t n_entries) {
  if (n_entries > locations_.size()) locations_.resize(n_entries);
}

PlacementMap place_clusters(const ClusterSet& cs, std::size_t n_disk, StartPolicy policy) {
  PlacementMap pm(n_disk, cs.entry_count(), policy);
  for (const auto& c : cs.clusters()) pm.place_cluster(c);
  return pm;
}

PlacementMap place_sequential(std::size_t n_entries, std::size_t n_disk) {
  PlacementMap pm(n_disk, n_entries);
  for (std::size_t e = 0; e < n_entries; ++e) {
    pm.append(static_cast<EntryId>(e), static_cast<DeviceId>(e % n_disk));
  }
  return pm;
}

double cost_effectiveness(std::int64_t f, std::size_t s, const CacheScoreParams& p) {
  KVSWARM_CHECK(s >= 1, ErrorCode::kInvalidArgument, "cluster size must be positive");
  const double freq = static_cast<double>(std::max<std::int64_t>(f, 0));
  const double size = static_cast<double>(s);
  return freq * (p.t_base_us + size * p.t_transfer_us) / size;
}

std::size_t cluster_entries(const ClusterSet& cs, std::span<const ClusterId> ids) {
  std::size_t total = 0;
  for (ClusterId c : ids) total += cs.at(c).members.size();
  return total;
}

std::vector<ClusterId> select_hot_clusters(const ClusterSet& cs, std::span<const std::int64_t> freqs,
                                           std::size_t budget_entries, const CacheScoreParams& p) {
  KVSWARM_CHECK(freqs.size() == cs.size(), ErrorCode::kInconsistent,
                "frequency table does not match cluster count");
  std::vector<double> score(cs.size());
  for (const auto& c : cs.clusters()) score[c.id] = cost_effectiveness(freqs[c.id], c.members.size(), p);
  std::vector<ClusterId> order(cs.size());
  std::iota(order.begin(), order.end(), ClusterId{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](ClusterId a, ClusterId b) { return score[a] > score[b]; });

  std::vector<ClusterId> hot;
  std::size_t used = 0;
  for (ClusterId c : order) {
    const std::size_t s = cs.at(c).members.size();
    if (used + s > budget_entries) continue;
    used += s;
    hot.push_back(c);
  }
  return hot;
}

std::vector<std::int64_t> cluster_frequencies(const ClusterSet& cs, const ActivationTrace& trace,
                                              Selection selection) {
  std::vector<std::int64_t> freq(cs.size(), 0);
  for (const auto& step : trace.steps()) {
    for (ClusterId c : activated_clusters(cs, step.activated, selection)) ++freq[c];
  }
  return freq;
}

DramPlan build_dram_plan(const ClusterSet& cs, const PlacementMap& pm,
                         std::span<const std::int64_t> freqs, std::size_t window,
                         std::size_t budget_entries, const CacheScoreParams& p) {
  KVSWARM_CHECK(pm.cluster_count() == cs.size(), ErrorCode::kInconsistent,
                "placement does not cover every cluster");
  DramPlan plan;
  plan.medoid_index.reserve(cs.size());
  for (const auto& c : cs.clusters()) plan.medoid_index.push_back({c.medoid, pm.cluster_start(c.id)});
  plan.window_capacity = window;
  const std::size_t n = cs.entry_count();
  for (std::size_t e = n - std::min(window, n); e < n; ++e) {
    plan.window.push_back(static_cast<EntryId>(e));
  }
  plan.hot_cache = select_hot_clusters(cs, freqs, budget_entries, p);
  std::sort(plan.hot_cache.begin(), plan.hot_cache.end());
  plan.cache_budget_entries = budget_entries;
  return plan;
}

}  // namespace kvswarm
