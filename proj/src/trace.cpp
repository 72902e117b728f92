// Copyright 2026 The kvswarm Authors
// SPDX-License-Identifier: Apache-2.0

#include "kvswarm/trace.hpp"

#include <algorithm>
#include <string>

#include "kvswarm/error.hpp"

namespace kvswarm {

ActivationTrace::ActivationTrace(std::size_t initial_entries, std::vector<ActivationStep> steps)
    : initial_entries_(initial_entries), steps_(std::move(steps)) {
  entries_at_.reserve(steps_.size());
  std::size_t count = initial_entries_;
  for (std::size_t t = 0; t < steps_.size(); ++t) {
    auto& step = steps_[t];
    for (std::size_t k = 0; k < step.new_entries.size(); ++k) {
      KVSWARM_CHECK(step.new_entries[k] == count + k, ErrorCode::kInvalidArgument,
                    "step " + std::to_string(t) + ": new entry " +
                        std::to_string(step.new_entries[k]) + " is not fresh (expected " +
                        std::to_string(count + k) + ")");
    }
    count += step.new_entries.size();
    std::sort(step.activated.begin(), step.activated.end());
    step.activated.erase(std::unique(step.activated.begin(), step.activated.end()),
                         step.activated.end());
    if (!step.activated.empty()) {
      KVSWARM_CHECK(step.activated.back() < count, ErrorCode::kInvalidArgument,
                    "step " + std::to_string(t) + ": activated entry " +
                        std::to_string(step.activated.back()) + " >= entry count " +
                        std::to_string(count));
    }
    entries_at_.push_back(count);
  }
}

std::size_t ActivationTrace::entry_count() const noexcept {
  return entries_at_.empty() ? initial_entries_ : entries_at_.back();
}

std::size_t ActivationTrace::prefill_steps() const noexcept {
  std::size_t t = 0;
  while (t < steps_.size() && steps_[t].new_entries.empty()) ++t;
  return t;
}

ActivationTrace ActivationTrace::prefix(std::size_t n_steps) const {
  n_steps = std::min(n_steps, steps_.size());
  return ActivationTrace(initial_entries_,
                         std::vector<ActivationStep>(steps_.begin(), steps_.begin() + n_steps));
}

// --- AdjacencyMatrix -------------------------------------------------------

namespace {

std::uint64_t pair_key(EntryId i, EntryId j) {
  if (i > j) std::swap(i, j);
  return (static_cast<std::uint64_t>(i) << 32) | j;
}

}  // namespace

AdjacencyMatrix::AdjacencyMatrix(std::size_t n, std::size_t dense_limit)
    : n_(n), dense_(n <= dense_limit) {
  if (dense_) dense_counts_.assign(n_ * n_, 0);
}

std::uint32_t AdjacencyMatrix::count(EntryId i, EntryId j) const {
  KVSWARM_CHECK(i < n_ && j < n_, ErrorCode::kInvalidArgument, "entry id out of range");
  if (i == j) return 0;
  if (dense_) return dense_counts_[static_cast<std::size_t>(i) * n_ + j];
  auto it = sparse_counts_.find(pair_key(i, j));
  return it == sparse_counts_.end() ? 0 : it->second;
}

void AdjacencyMatrix::increment(EntryId i, EntryId j) {
  KVSWARM_CHECK(i < n_ && j < n_ && i != j, ErrorCode::kInvalidArgument,
                "invalid adjacency pair");
  std::uint32_t value;
  if (dense_) {
    value = ++dense_counts_[static_cast<std::size_t>(i) * n_ + j];
    ++dense_counts_[static_cast<std::size_t>(j) * n_ + i];
  } else {
    value = ++sparse_counts_[pair_key(i, j)];
  }
  ++unordered_total_;
  max_count_ = std::max(max_count_, value);
}

AdjacencyMatrix build_adjacency(const ActivationTrace& trace) {
  const std::size_t n = trace.entry_count();
  KVSWARM_CHECK(n > 0, ErrorCode::kInvalidArgument, "trace declares zero entries");
  AdjacencyMatrix adj(n);
  for (const auto& step : trace.steps()) {
    const auto& act = step.activated;
    for (std::size_t a = 0; a < act.size(); ++a) {
      for (std::size_t b = a + 1; b < act.size(); ++b) adj.increment(act[a], act[b]);
    }
  }
  return adj;
}

namespace {

double normalizer(const AdjacencyMatrix& adj, Normalization norm) {
  const double den = norm == Normalization::kGlobalSum ? static_cast<double>(adj.ordered_total())
                                                       : static_cast<double>(adj.max_count());
  KVSWARM_CHECK(den > 0, ErrorCode::kZeroDenominator,
                "co-activation matrix is all zero: no two entries were ever activated together");
  return den;
}

}  // namespace

double coactivation_probability(const AdjacencyMatrix& adj, EntryId i, EntryId j,
                                Normalization norm) {
  const double den = normalizer(adj, norm);
  return adj.count(i, j) / den;
}

// --- DistanceMatrix --------------------------------------------------------

DistanceMatrix::DistanceMatrix(std::size_t n, double fill) : n_(n), values_(n * n, fill) {
  KVSWARM_CHECK(fill >= 0.0 && fill <= 1.0, ErrorCode::kInvalidArgument,
                "distance fill outside [0,1]");
  for (std::size_t i = 0; i < n_; ++i) values_[i * n_ + i] = 0.0;
}

DistanceMatrix DistanceMatrix::from_dense(std::size_t n, std::vector<double> values) {
  KVSWARM_CHECK(values.size() == n * n, ErrorCode::kInvalidArgument,
                "distance matrix must have n*n values");
  for (std::size_t i = 0; i < n; ++i) {
    KVSWARM_CHECK(values[i * n + i] == 0.0, ErrorCode::kInvalidArgument,
                  "distance matrix diagonal must be zero");
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = values[i * n + j];
      KVSWARM_CHECK(d == values[j * n + i], ErrorCode::kInvalidArgument,
                    "distance matrix must be symmetric");
      KVSWARM_CHECK(d >= 0.0 && d <= 1.0, ErrorCode::kInvalidArgument,
                    "distance outside [0,1]");
    }
  }
  DistanceMatrix out;
  out.n_ = n;
  out.values_ = std::move(values);
  return out;
}

DistanceMatrix DistanceMatrix::derived(std::shared_ptr<const AdjacencyMatrix> adj,
                                       double denominator) {
  KVSWARM_CHECK(adj && denominator > 0, ErrorCode::kInvalidArgument,
                "derived distance needs an adjacency and a positive denominator");
  DistanceMatrix out;
  out.n_ = adj->size();
  out.adj_ = std::move(adj);
  out.denominator_ = denominator;
  return out;
}

double DistanceMatrix::operator()(EntryId i, EntryId j) const {
  if (adj_) {
    if (i == j) return 0.0;
    return 1.0 - adj_->count(i, j) / denominator_;
  }
  return values_[static_cast<std::size_t>(i) * n_ + j];
}

void DistanceMatrix::set(EntryId i, EntryId j, double d) {
  KVSWARM_CHECK(!adj_, ErrorCode::kInvalidArgument, "derived distance matrix is read-only");
  KVSWARM_CHECK(i < n_ && j < n_, ErrorCode::kInvalidArgument, "entry id out of range");
  KVSWARM_CHECK(d >= 0.0 && d <= 1.0, ErrorCode::kInvalidArgument, "distance outside [0,1]");
  if (i == j) return;
  values_[static_cast<std::size_t>(i) * n_ + j] = d;
  values_[static_cast<std::size_t>(j) * n_ + i] = d;
}

DistanceMatrix build_distance_matrix(const AdjacencyMatrix& adj, Normalization norm) {
  const double den = normalizer(adj, norm);
  const std::size_t n = adj.size();
  if (!adj.is_dense()) {
    return DistanceMatrix::derived(std::make_shared<AdjacencyMatrix>(adj), den);
  }
  std::vector<double> values(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = 1.0 - adj.count(static_cast<EntryId>(i), static_cast<EntryId>(j)) / den;
      values[i * n + j] = d;
      values[j * n + i] = d;
    }
  }
  return DistanceMatrix::from_dense(n, std::move(values));
}

double tau_for_min_count(const AdjacencyMatrix& adj, double min_count, Normalization norm) {
  return 1.0 - min_count / normalizer(adj, norm);
}

std::vector<std::uint32_t> activation_counts(const ActivationTrace& trace) {
  std::vector<std::uint32_t> counts(trace.entry_count(), 0);
  for (const auto& step : trace.steps()) {
    for (EntryId e : step.activated) ++counts[e];
  }
  return counts;
}

DistanceMatrix build_overlap_distance_matrix(const ActivationTrace& trace) {
  const AdjacencyMatrix adj = build_adjacency(trace);
  const auto freq = activation_counts(trace);
  const std::size_t n = adj.size();
  std::vector<double> values(n * n, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    values[i * n + i] = 0.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const std::uint32_t rarer = std::min(freq[i], freq[j]);
      if (rarer == 0) continue;
      const double d =
          1.0 - static_cast<double>(adj.count(static_cast<EntryId>(i), static_cast<EntryId>(j))) /
                    rarer;
      values[i * n + j] = d;
      values[j * n + i] = d;
    }
  }
  return DistanceMatrix::from_dense(n, std::move(values));
}

}  // namespace kvswarm
