// Copyright 2026 The kvswarm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <memory>
#include <unordered_map>
#include <vector>

#include "kvswarm/types.hpp"

namespace kvswarm {

/// One decoding step: the entries selected by sparse attention, plus the
/// entries appended to the cache by this step.
struct ActivationStep {
  std::vector<EntryId> activated;    // sorted, no duplicates
  std::vector<EntryId> new_entries;  // consecutive ids starting at the previous entry count
};

/// Ordered activation record for one layer's cache.
///
/// `initial_entries` is the cache length before step 0. A step may activate any
/// entry that exists once its own `new_entries` have been appended.
class ActivationTrace {
 public:
  ActivationTrace() = default;

  /// Sorts and de-duplicates every activation set, then validates id ranges.
  /// Throws Error(kInvalidArgument) when an id is out of range or new entries
  /// are not fresh and consecutive.
  ActivationTrace(std::size_t initial_entries, std::vector<ActivationStep> steps);

  std::size_t initial_entries() const noexcept { return initial_entries_; }
  std::size_t entry_count() const noexcept;
  std::size_t entries_at(std::size_t step) const { return entries_at_.at(step); }

  const std::vector<ActivationStep>& steps() const noexcept { return steps_; }
  std::size_t step_count() const noexcept { return steps_.size(); }

  /// Number of leading steps that append nothing (the profiling prefix).
  std::size_t prefill_steps() const noexcept;

  ActivationTrace prefix(std::size_t n_steps) const;

 private:
  std::size_t initial_entries_ = 0;
  std::vector<ActivationStep> steps_;
  std::vector<std::size_t> entries_at_;
};

enum class Normalization {
  kGlobalSum,  // f(i,j) / sum over all ordered pairs
  kRowMax,     // f(i,j) / max over all pairs; non-standard, for small traces
};

/// Symmetric pair co-activation counts with a zero diagonal.
///
/// Dense below `dense_limit` entries, hash-map backed above it.
class AdjacencyMatrix {
 public:
  static constexpr std::size_t kDenseLimit = 16384;

  explicit AdjacencyMatrix(std::size_t n, std::size_t dense_limit = kDenseLimit);

  std::size_t size() const noexcept { return n_; }
  bool is_dense() const noexcept { return dense_; }

  std::uint32_t count(EntryId i, EntryId j) const;
  void increment(EntryId i, EntryId j);

  /// Sum over all ordered pairs (k, l), i.e. twice the unordered sum.
  std::uint64_t ordered_total() const noexcept { return 2 * unordered_total_; }
  std::uint32_t max_count() const noexcept { return max_count_; }

 private:
  std::size_t n_ = 0;
  bool dense_ = true;
  std::vector<std::uint32_t> dense_counts_;
  std::unordered_map<std::uint64_t, std::uint32_t> sparse_counts_;
  std::uint64_t unordered_total_ = 0;
  std::uint32_t max_count_ = 0;
};

/// Pairwise distances in [0,1], symmetric, zero diagonal.
class DistanceMatrix {
 public:
  DistanceMatrix() = default;

  /// n x n matrix with every off-diagonal distance set to `fill`.
  explicit DistanceMatrix(std::size_t n, double fill = 1.0);

  /// Row-major n x n values; validates symmetry, range and diagonal.
  static DistanceMatrix from_dense(std::size_t n, std::vector<double> values);

  /// Lazily evaluated 1 - count/denominator over a (large, sparse) adjacency.
  static DistanceMatrix derived(std::shared_ptr<const AdjacencyMatrix> adj, double denominator);

  std::size_t size() const noexcept { return n_; }
  double operator()(EntryId i, EntryId j) const;
  void set(EntryId i, EntryId j, double d);

 private:
  std::size_t n_ = 0;
  std::vector<double> values_;
  std::shared_ptr<const AdjacencyMatrix> adj_;
  double denominator_ = 1.0;
};

AdjacencyMatrix build_adjacency(const ActivationTrace& trace);

/// counts(i,j) over the normalizer chosen by `norm`.
/// Throws Error(kZeroDenominator) for an all-zero matrix.
double coactivation_probability(const AdjacencyMatrix& adj, EntryId i, EntryId j,
                                Normalization norm = Normalization::kGlobalSum);

/// d(i,j) = 1 - P(i,j), d(i,i) = 0.
DistanceMatrix build_distance_matrix(const AdjacencyMatrix& adj,
                                     Normalization norm = Normalization::kGlobalSum);

/// Radius equivalent to "co-activated in at least `min_count` steps" under `norm`.
double tau_for_min_count(const AdjacencyMatrix& adj, double min_count,
                         Normalization norm = Normalization::kGlobalSum);

/// Per-entry number of steps in which the entry was activated.
std::vector<std::uint32_t> activation_counts(const ActivationTrace& trace);

/// Evaluation metric, not used for clustering: 1 - f(i,j) / min(f(i), f(j)),
/// the share of the rarer entry's activations that missed the other one.
/// Pairs where either entry was never activated are at distance 1.
DistanceMatrix build_overlap_distance_matrix(const ActivationTrace& trace);

}  // namespace kvswarm
