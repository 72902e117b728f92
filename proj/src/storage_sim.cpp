// Copyright 2026 The kvswarm Authors
// SPDX-License-Identifier: Apache-2.0

#include "kvswarm/storage_sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <memory>
#include <utility>

#include "kvswarm/error.hpp"

namespace kvswarm {

DeviceModel DeviceModel::preset(std::string_view name) {
  if (name == "pm9a3") return {"pm9a3", 6.9e9, 1.1e6, 10.0};
  if (name == "optane_900p") return {"optane_900p", 2.5e9, 0.55e6, 10.0};
  fail(ErrorCode::kUsage, "unknown device preset '" + std::string(name) + "'");
}

std::vector<std::string> DeviceModel::preset_names() { return {"pm9a3", "optane_900p"}; }

namespace {

struct ModelDims {
  const char* name;
  std::uint64_t hidden;
};

constexpr ModelDims kModels[] = {
    {"qwen3-14b", 5120},    {"qwen3-32b", 5120},       {"llama3.1-70b", 8192},
    {"gpt-oss-120b", 2880}, {"qwen3-235b-moe", 4096},
};

constexpr const char* kModeNames[] = {"swarm", "static", "no_balance", "no_dedup", "no_cluster"};

}  // namespace

std::uint64_t model_entry_size(std::string_view model) {
  for (const auto& m : kModels) {
    if (model == m.name) return 2 * m.hidden * 2;
  }
  fail(ErrorCode::kUsage, "unknown model '" + std::string(model) + "'");
}

std::vector<std::string> model_names() {
  std::vector<std::string> out;
  for (const auto& m : kModels) out.emplace_back(m.name);
  return out;
}

std::string_view to_string(RetrievalMode mode) { return kModeNames[static_cast<int>(mode)]; }

RetrievalMode parse_mode(std::string_view name) {
  for (int i = 0; i < 5; ++i) {
    if (name == kModeNames[i]) return static_cast<RetrievalMode>(i);
  }
  fail(ErrorCode::kUsage, "unknown retrieval mode '" + std::string(name) + "'");
}

std::vector<RetrievalMode> all_modes() {
  return {RetrievalMode::kSwarm, RetrievalMode::kStatic, RetrievalMode::kNoBalance,
          RetrievalMode::kNoDedup, RetrievalMode::kNoCluster};
}

double entry_cost_us(const SimConfig& cfg) {
  const double transfer = static_cast<double>(cfg.entry_size) / cfg.device.bandwidth;
  const double request = 1.0 / cfg.device.iops;
  return std::max(transfer, request) * 1e6;
}

CacheScoreParams score_params(const SimConfig& cfg) {
  return {cfg.device.t_base_us, entry_cost_us(cfg)};
}

StepMetrics simulate_step(const IoPlan& plan, const SimConfig& cfg) {
  KVSWARM_CHECK(cfg.entry_size > 0, ErrorCode::kInvalidArgument, "entry size must be positive");
  KVSWARM_CHECK(cfg.device.bandwidth > 0 && cfg.device.iops > 0 && cfg.device.t_base_us >= 0,
                ErrorCode::kInvalidArgument, "device model parameters must be positive");
  KVSWARM_CHECK(plan.buckets.size() <= cfg.n_disk, ErrorCode::kInconsistent,
                "plan uses more devices than configured");
  StepMetrics m;
  m.per_device_entries.assign(cfg.n_disk, 0);
  const double cost = entry_cost_us(cfg);
  std::uint64_t entries = 0;
  for (std::size_t d = 0; d < plan.buckets.size(); ++d) {
    const std::size_t k = plan.buckets[d].size();
    m.per_device_entries[d] = k;
    entries += k;
    if (k == 0) continue;
    const double addressing = cfg.addressing == Addressing::kPerStep
                                  ? cfg.device.t_base_us
                                  : cfg.device.t_base_us * static_cast<double>(k);
    m.io_time_us = std::max(m.io_time_us, addressing + static_cast<double>(k) * cost);
  }
  m.io_volume = entries * cfg.entry_size;
  if (m.io_time_us > 0) m.effective_bandwidth = static_cast<double>(m.io_volume) / (m.io_time_us * 1e-6);
  return m;
}

double lower_bound_us(std::size_t n_entries, const SimConfig& cfg) {
  if (n_entries == 0) return 0.0;
  const std::size_t per_device = (n_entries + cfg.n_disk - 1) / cfg.n_disk;
  const double addressing = cfg.addressing == Addressing::kPerStep
                                ? cfg.device.t_base_us
                                : cfg.device.t_base_us * static_cast<double>(per_device);
  return addressing + static_cast<double>(per_device) * entry_cost_us(cfg);
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) return 0.0;
  KVSWARM_CHECK(q > 0.0 && q <= 1.0, ErrorCode::kInvalidArgument, "percentile outside (0,1]");
  std::sort(values.begin(), values.end());
  auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(values.size())));
  rank = std::clamp<std::size_t>(rank, 1, values.size());
  return values[rank - 1];
}

Summary summarize(std::span<const StepMetrics> steps, const SimConfig& cfg) {
  Summary s;
  s.steps = steps.size();
  std::vector<double> times;
  times.reserve(steps.size());
  double bw_sum = 0.0;
  std::size_t bw_steps = 0;
  for (const auto& m : steps) {
    times.push_back(m.io_time_us);
    s.total_io_time_us += m.io_time_us;
    s.total_volume += m.io_volume;
    s.cache_hits += m.cache_hits;
    s.cluster_accesses += m.cluster_accesses;
    s.lower_bound_us += lower_bound_us(m.lower_bound_entries, cfg);
    s.assigned_entries += m.assigned_entries;
    if (m.io_time_us > 0) {
      bw_sum += m.effective_bandwidth;
      ++bw_steps;
    }
  }
  if (!steps.empty()) s.mean_io_time_us = s.total_io_time_us / static_cast<double>(steps.size());
  s.p50_io_time_us = percentile(times, 0.5);
  s.p99_io_time_us = percentile(times, 0.99);
  s.max_io_time_us = percentile(times, 1.0);
  if (s.total_io_time_us > 0) {
    s.effective_bandwidth = static_cast<double>(s.total_volume) / (s.total_io_time_us * 1e-6);
  }
  if (bw_steps > 0) s.mean_step_bandwidth = bw_sum / static_cast<double>(bw_steps);
  if (s.cluster_accesses > 0) {
    s.cache_hit_rate = static_cast<double>(s.cache_hits) / static_cast<double>(s.cluster_accesses);
  }
  return s;
}

std::string metrics_csv(std::span<const StepMetrics> steps) {
  std::string out =
      "step,io_time_us,io_volume_bytes,max_device_entries,min_device_entries,cache_hits,"
      "effective_bw_bytes_per_s\n";
  char line[256];
  for (const auto& m : steps) {
    std::size_t hi = 0;
    std::size_t lo = m.per_device_entries.empty() ? 0 : m.per_device_entries.front();
    for (std::size_t k : m.per_device_entries) {
      hi = std::max(hi, k);
      lo = std::min(lo, k);
    }
    std::snprintf(line, sizeof line, "%zu,%.3f,%llu,%zu,%zu,%llu,%.1f\n", m.step, m.io_time_us,
                  static_cast<unsigned long long>(m.io_volume), hi, lo,
                  static_cast<unsigned long long>(m.cache_hits), m.effective_bandwidth);
    out += line;
  }
  return out;
}

// --- workload replay -------------------------------------------------------

namespace {

std::size_t entries_before(const ActivationTrace& trace, std::size_t step) {
  return step == 0 ? trace.initial_entries() : trace.entries_at(step - 1);
}

class WindowBuffer {
 public:
  WindowBuffer(std::deque<EntryId> init, std::size_t capacity)
      : window_(std::move(init)), capacity_(capacity) {
    trim();
  }
  void push(EntryId e) {
    window_.push_back(e);
    trim();
  }
  const std::deque<EntryId>& entries() const { return window_; }

 private:
  void trim() {
    while (window_.size() > capacity_) window_.pop_front();
  }
  std::deque<EntryId> window_;
  std::size_t capacity_;
};

void mark(std::vector<bool>& mask, EntryId e) {
  if (e >= mask.size()) mask.resize(static_cast<std::size_t>(e) + 1, false);
  mask[e] = true;
}

RunResult run_sequential(const ActivationTrace& trace, PlacementMap pm, const DramPlan& dram,
                         const SimConfig& cfg, const RunOptions& opts) {
  RunResult result;
  WindowBuffer window(dram.window, dram.window_capacity);
  // (entry, steps observed) for entries not yet written to SSD.
  std::deque<std::pair<EntryId, std::size_t>> pending;
  std::size_t n = entries_before(trace, opts.start_step);
  KVSWARM_CHECK(pm.entry_count() <= n, ErrorCode::kInconsistent,
                "placement covers more entries than the trace declares");
  for (std::size_t e = pm.entry_count(); e < n; ++e) pending.emplace_back(static_cast<EntryId>(e), 0);

  for (std::size_t t = opts.start_step; t < trace.step_count(); ++t) {
    const auto& step = trace.steps()[t];
    for (EntryId e : step.new_entries) {
      window.push(e);
      pending.emplace_back(e, 0);
    }
    n = trace.entries_at(t);

    std::vector<bool> dram_mask(n, false);
    for (EntryId e : window.entries()) mark(dram_mask, e);
    for (const auto& [e, seen] : pending) mark(dram_mask, e);
    std::vector<EntryId> requests;
    for (std::size_t e = 0; e < n; ++e) {
      if (!dram_mask[e]) requests.push_back(static_cast<EntryId>(e));
    }
    auto m = simulate_step(schedule(requests, pm, RoutePolicy::kFirstReplica), cfg);
    m.step = t;
    m.lower_bound_entries = requests.size();

    if (opts.adapt) {
      for (auto& p : pending) ++p.second;
      while (!pending.empty() && pending.front().second >= opts.maintainer.window) {
        const EntryId e = pending.front().first;
        pm.append(e, static_cast<DeviceId>(e % pm.n_disk()));
        pending.pop_front();
        ++m.assigned_entries;
      }
    }
    result.steps.push_back(std::move(m));
  }
  result.summary = summarize(result.steps, cfg);
  return result;
}

}  // namespace

RunResult run_workload(const ActivationTrace& trace, ClusterSet cs, PlacementMap pm, DramPlan dram,
                       const SimConfig& cfg, const RunOptions& opts, const DistanceMatrix* offline) {
  KVSWARM_CHECK(pm.n_disk() == cfg.n_disk, ErrorCode::kInconsistent,
                "placement and simulator disagree on the device count");
  KVSWARM_CHECK(opts.start_step <= trace.step_count(), ErrorCode::kInvalidArgument,
                "start step beyond the end of the trace");
  if (cfg.mode == RetrievalMode::kNoCluster) return run_sequential(trace, std::move(pm), dram, cfg, opts);

  KVSWARM_CHECK(pm.cluster_count() == cs.size(), ErrorCode::kInconsistent,
                "placement does not match the cluster set");
  const std::size_t n0 = entries_before(trace, opts.start_step);
  KVSWARM_CHECK(cs.entry_count() <= n0, ErrorCode::kInconsistent,
                "cluster set covers more entries than the trace declares");

  RunResult result;
  const CacheScoreParams params = score_params(cfg);
  std::unique_ptr<ClusterCache> cache;
  switch (opts.cache) {
    case CacheKind::kScore:
      cache = std::make_unique<ScoreCache>(cs, opts.cluster_freq, dram.hot_cache,
                                           dram.cache_budget_entries, params);
      break;
    case CacheKind::kLru:
      cache = std::make_unique<LruCache>(cs, dram.hot_cache, dram.cache_budget_entries);
      break;
    case CacheKind::kNone:
      break;
  }

  ClusterMaintainer maintainer(cs, pm, opts.maintainer, offline);
  std::vector<EntryId> carried;
  for (std::size_t e = cs.entry_count(); e < n0; ++e) carried.push_back(static_cast<EntryId>(e));
  maintainer.add_entries(carried);
  WindowBuffer window(dram.window, dram.window_capacity);

  const bool dedup = cfg.mode == RetrievalMode::kSwarm || cfg.mode == RetrievalMode::kNoBalance;
  const RoutePolicy route =
      cfg.mode == RetrievalMode::kSwarm || cfg.mode == RetrievalMode::kNoDedup
          ? RoutePolicy::kBalanced
          : RoutePolicy::kFirstReplica;

  for (std::size_t t = opts.start_step; t < trace.step_count(); ++t) {
    const auto& step = trace.steps()[t];
    maintainer.add_entries(step.new_entries);
    for (EntryId e : step.new_entries) window.push(e);
    const std::size_t n = trace.entries_at(t);

    std::vector<bool> dram_mask(n, false);
    for (const auto& c : cs.clusters()) mark(dram_mask, c.medoid);
    for (EntryId e : window.entries()) mark(dram_mask, e);
    for (EntryId e : maintainer.pending_entries()) mark(dram_mask, e);
    if (cache) {
      for (ClusterId c : cache->residents()) {
        for (EntryId e : cs.at(c).members) mark(dram_mask, e);
      }
    }

    const auto selected = activated_clusters(cs, step.activated, opts.selection);
    const auto distinct = merge_activated(selected, cs, dram_mask);
    const auto requests = dedup ? distinct : collect_requests(selected, cs, dram_mask);
    auto m = simulate_step(schedule(requests, pm, route), cfg);
    m.step = t;
    m.lower_bound_entries = distinct.size();
    m.cluster_accesses = selected.size();
    if (cache) {
      for (ClusterId c : selected) m.cache_hits += cache->contains(c) ? 1 : 0;
      cache->access(selected, cs);
    }

    if (opts.adapt) {
      for (const auto& [e, joined] : maintainer.step(step.activated)) {
        (void)joined;
        ++m.assigned_entries;
      }
      if (cache) cache->fit(cs);
    }
    result.steps.push_back(std::move(m));
  }
  result.summary = summarize(result.steps, cfg);
  result.final_clusters = cs.size();
  return result;
}

}  // namespace kvswarm
