// Copyright 2026 The kvswarm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kvswarm/adaptation.hpp"
#include "kvswarm/clustering.hpp"
#include "kvswarm/placement.hpp"
#include "kvswarm/scheduler.hpp"
#include "kvswarm/trace.hpp"

namespace kvswarm {

struct DeviceModel {
  std::string name = "pm9a3";
  double bandwidth = 6.9e9;  // bytes/s
  double iops = 1.1e6;       // requests/s
  double t_base_us = 10.0;   // addressing latency per submission

  /// "pm9a3" or "optane_900p". Throws Error(kUsage) otherwise.
  static DeviceModel preset(std::string_view name);
  static std::vector<std::string> preset_names();
};

/// Bytes per entry per layer for a named model: K and V in BF16,
/// 2 * hidden_dim * 2. Throws Error(kUsage) for unknown names.
std::uint64_t model_entry_size(std::string_view model);
std::vector<std::string> model_names();

enum class Addressing {
  kPerStep,   // one addressing charge per device per step (batched submission)
  kPerEntry,  // one addressing charge per entry read
};

enum class RetrievalMode { kSwarm, kStatic, kNoBalance, kNoDedup, kNoCluster };

std::string_view to_string(RetrievalMode mode);
/// Throws Error(kUsage) for unknown names.
RetrievalMode parse_mode(std::string_view name);
std::vector<RetrievalMode> all_modes();

struct SimConfig {
  std::size_t n_disk = 4;
  DeviceModel device;
  std::uint64_t entry_size = 20480;
  RetrievalMode mode = RetrievalMode::kSwarm;
  Addressing addressing = Addressing::kPerStep;
};

/// Time to read one entry once the device is streaming, in microseconds:
/// the slower of the bandwidth and IOPS limits.
double entry_cost_us(const SimConfig& cfg);

/// Cost-effectiveness parameters implied by the device model.
CacheScoreParams score_params(const SimConfig& cfg);

struct StepMetrics {
  std::size_t step = 0;
  double io_time_us = 0.0;
  std::uint64_t io_volume = 0;  // bytes
  std::vector<std::size_t> per_device_entries;
  std::uint64_t cache_hits = 0;       // selected clusters already resident in DRAM
  std::uint64_t cluster_accesses = 0;  // selected clusters
  double effective_bandwidth = 0.0;   // bytes/s, 0 when nothing was read
  std::size_t lower_bound_entries = 0;  // distinct entries that had to come from SSD
  std::size_t assigned_entries = 0;
};

StepMetrics simulate_step(const IoPlan& plan, const SimConfig& cfg);

/// t_base + ceil(n / n_disk) * entry cost, or 0 for n == 0: no policy can
/// read n distinct entries faster.
double lower_bound_us(std::size_t n_entries, const SimConfig& cfg);

enum class CacheKind { kScore, kLru, kNone };

struct RunOptions {
  Selection selection = Selection::kOracle;
  CacheKind cache = CacheKind::kScore;
  // Initial frequencies for the score cache, by cluster id (empty: zeros).
  std::vector<std::int64_t> cluster_freq;
  bool adapt = true;
  MaintainerOptions maintainer;
  std::size_t start_step = 0;
};

struct Summary {
  std::size_t steps = 0;
  double total_io_time_us = 0.0;
  double mean_io_time_us = 0.0;
  double p50_io_time_us = 0.0;
  double p99_io_time_us = 0.0;
  double max_io_time_us = 0.0;
  std::uint64_t total_volume = 0;
  double effective_bandwidth = 0.0;  // total volume / total time
  double mean_step_bandwidth = 0.0;  // over steps that read anything
  std::uint64_t cache_hits = 0;
  std::uint64_t cluster_accesses = 0;
  double cache_hit_rate = 0.0;
  double lower_bound_us = 0.0;  // sum of per-step bounds
  std::size_t assigned_entries = 0;
};

struct RunResult {
  std::vector<StepMetrics> steps;
  Summary summary;
  std::size_t final_clusters = 0;
};

/// Replays `trace` from opts.start_step: select clusters, merge against DRAM,
/// schedule, simulate, update the cache and assign matured new entries.
/// `offline` is needed only for the min-diff assignment baseline.
/// For RetrievalMode::kNoCluster `cs` is ignored and `pm` must be a
/// sequential layout; each step then reads every SSD-resident entry.
RunResult run_workload(const ActivationTrace& trace, ClusterSet cs, PlacementMap pm, DramPlan dram,
                       const SimConfig& cfg, const RunOptions& opts,
                       const DistanceMatrix* offline = nullptr);

Summary summarize(std::span<const StepMetrics> steps, const SimConfig& cfg);

/// Nearest-rank percentile, q in (0, 1].
double percentile(std::vector<double> values, double q);

/// Per-step CSV with a header row.
std::string metrics_csv(std::span<const StepMetrics> steps);

}  // namespace kvswarm
