// Copyright 2026 The kvswarm Authors
// SPDX-License-Identifier: Apache-2.0

#include "kvswarm/scheduler.hpp"

#include <algorithm>
#include <numeric>

#include "kvswarm/error.hpp"

namespace kvswarm {

namespace {

bool resident(const std::vector<bool>& mask, EntryId e) { return e < mask.size() && mask[e]; }

}  // namespace

std::vector<EntryId> merge_activated(const RetrievalRequest& req, const ClusterSet& cs) {
  std::vector<bool> mask(cs.entry_count(), false);
  for (EntryId e : req.dram_resident) {
    if (e < mask.size()) mask[e] = true;
  }
  return merge_activated(req.activated_clusters, cs, mask);
}

std::vector<EntryId> merge_activated(std::span<const ClusterId> activated, const ClusterSet& cs,
                                     const std::vector<bool>& dram_resident) {
  std::vector<EntryId> out;
  for (ClusterId c : activated) {
    for (EntryId e : cs.at(c).members) {
      if (!resident(dram_resident, e)) out.push_back(e);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<EntryId> collect_requests(std::span<const ClusterId> activated, const ClusterSet& cs,
                                      const std::vector<bool>& dram_resident) {
  std::vector<EntryId> out;
  for (ClusterId c : activated) {
    for (EntryId e : cs.at(c).members) {
      if (!resident(dram_resident, e)) out.push_back(e);
    }
  }
  return out;
}

std::size_t IoPlan::total() const noexcept {
  std::size_t n = 0;
  for (const auto& b : buckets) n += b.size();
  return n;
}

std::vector<std::vector<EntryId>> IoPlan::batches() const {
  std::vector<std::vector<EntryId>> out(max_load(*this));
  for (const auto& b : buckets) {
    for (std::size_t i = 0; i < b.size(); ++i) out[i].push_back(b[i]);
  }
  return out;
}

IoPlan schedule(std::span<const EntryId> requests, const PlacementMap& pm, RoutePolicy policy) {
  struct Item {
    std::size_t rf;
    EntryId id;
    std::vector<DeviceId> devices;
  };
  std::vector<Item> items;
  items.reserve(requests.size());
  for (EntryId e : requests) {
    auto devs = pm.devices_of(e);
    KVSWARM_CHECK(!devs.empty(), ErrorCode::kInconsistent,
                  "entry " + std::to_string(e) + " has no replica on any device");
    if (policy == RoutePolicy::kFirstReplica) devs = {pm.locations(e).front().device};
    const std::size_t rf = devs.size();
    items.push_back({rf, e, std::move(devs)});
  }
  std::stable_sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
    if (a.rf != b.rf) return a.rf < b.rf;
    return a.id < b.id;
  });

  IoPlan plan;
  plan.buckets.resize(pm.n_disk());
  for (const auto& item : items) {
    DeviceId best = item.devices.front();
    for (DeviceId d : item.devices) {
      if (plan.buckets[d].size() < plan.buckets[best].size()) best = d;
    }
    plan.buckets[best].push_back(item.id);
  }
  return plan;
}

std::size_t max_load(const IoPlan& plan) noexcept {
  std::size_t m = 0;
  for (const auto& b : plan.buckets) m = std::max(m, b.size());
  return m;
}

std::size_t min_load(const IoPlan& plan) noexcept {
  if (plan.buckets.empty()) return 0;
  std::size_t m = plan.buckets.front().size();
  for (const auto& b : plan.buckets) m = std::min(m, b.size());
  return m;
}

std::string dump(const IoPlan& plan) {
  std::string out;
  for (std::size_t d = 0; d < plan.buckets.size(); ++d) {
    out += "bucket " + std::to_string(d) + ":";
    const auto& b = plan.buckets[d];
    for (std::size_t i = 0; i < b.size(); ++i) {
      out += (i == 0 ? " " : ",") + std::to_string(b[i]);
    }
    out += '\n';
  }
  return out;
}

}  // namespace kvswarm
