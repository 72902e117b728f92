// Copyright 2026 The kvswarm Authors
// SPDX-License-Identifier: Apache-2.0

#include "kvswarm/adaptation.hpp"

#include <algorithm>
#include <string>

#include "kvswarm/error.hpp"

namespace kvswarm {

// --- WindowStats -----------------------------------------------------------

WindowStats::WindowStats(std::size_t window) : window_(window) {
  KVSWARM_CHECK(window >= 1, ErrorCode::kInvalidArgument, "window must hold at least one step");
}

void WindowStats::track(EntryId e) {
  const bool inserted = tracks_.emplace(e, Track{}).second;
  KVSWARM_CHECK(inserted, ErrorCode::kInvalidArgument,
                "entry " + std::to_string(e) + " is already tracked");
}

const WindowStats::Track& WindowStats::track_of(EntryId e) const {
  auto it = tracks_.find(e);
  KVSWARM_CHECK(it != tracks_.end(), ErrorCode::kInvalidArgument,
                "entry " + std::to_string(e) + " is not tracked");
  return it->second;
}

void WindowStats::observe(std::span<const EntryId> activated,
                          std::span<const ClusterId> medoid_clusters) {
  for (auto& [e, t] : tracks_) {
    if (t.observed >= window_) continue;
    ++t.observed;
    if (!std::binary_search(activated.begin(), activated.end(), e)) continue;
    for (ClusterId c : medoid_clusters) ++t.counts[c];
  }
}

std::uint32_t WindowStats::observed(EntryId e) const { return track_of(e).observed; }

std::uint32_t WindowStats::cooccur(EntryId e, ClusterId c) const {
  const auto& counts = track_of(e).counts;
  auto it = counts.find(c);
  return it == counts.end() ? 0 : it->second;
}

std::vector<EntryId> WindowStats::ready_entries() const {
  std::vector<EntryId> out;
  for (const auto& [e, t] : tracks_) {
    if (t.observed >= window_) out.push_back(e);
  }
  return out;
}

void WindowStats::set(EntryId e, std::uint32_t observed, ClusterId c, std::uint32_t count) {
  KVSWARM_CHECK(observed <= window_ && count <= observed, ErrorCode::kInvalidArgument,
                "window counts out of range");
  auto& t = tracks_[e];
  t.observed = observed;
  t.counts[c] = count;
}

std::vector<ClusterId> clusters_with_active_medoid(const ClusterSet& cs,
                                                   std::span<const EntryId> activated) {
  return activated_clusters(cs, activated, Selection::kMedoid);
}

double new_entry_distance(const WindowStats& stats, EntryId e, ClusterId c) {
  KVSWARM_CHECK(stats.ready(e), ErrorCode::kNotReady,
                "entry " + std::to_string(e) + " has observed " + std::to_string(stats.observed(e)) +
                    " of " + std::to_string(stats.window()) + " window steps");
  return 1.0 - static_cast<double>(stats.cooccur(e, c)) / static_cast<double>(stats.window());
}

// --- assignment ------------------------------------------------------------

Assignment join_cluster(EntryId e, ClusterId c, double distance, ClusterSet& cs, PlacementMap& pm) {
  const std::size_t k = cs.at(c).members.size();
  cs.grow_entries(static_cast<std::size_t>(e) + 1);
  cs.add_member(c, e, distance);
  return {c, pm.extend_cluster(c, k, e), false};
}

Assignment make_singleton(EntryId e, ClusterSet& cs, PlacementMap& pm) {
  cs.grow_entries(static_cast<std::size_t>(e) + 1);
  const ClusterId id = cs.add_cluster(e);
  pm.place_cluster(cs.at(id));
  return {id, pm.locations(e).back(), true};
}

std::vector<Assignment> assign_new_entry(EntryId e, const WindowStats& stats, ClusterSet& cs,
                                         PlacementMap& pm, double tau) {
  // Distances first: joining must not change what later clusters see.
  std::vector<std::pair<ClusterId, double>> qualifying;
  for (const auto& c : cs.clusters()) {
    const double d = new_entry_distance(stats, e, c.id);
    if (d < tau) qualifying.emplace_back(c.id, d);
  }
  std::vector<Assignment> out;
  for (const auto& [c, d] : qualifying) out.push_back(join_cluster(e, c, d, cs, pm));
  if (out.empty()) out.push_back(make_singleton(e, cs, pm));
  return out;
}

ClusterMaintainer::ClusterMaintainer(ClusterSet& cs, PlacementMap& pm, MaintainerOptions opts,
                                     const DistanceMatrix* offline)
    : cs_(cs), pm_(pm), opts_(opts), offline_(offline), stats_(opts.window) {
  KVSWARM_CHECK(opts.policy != AssignPolicy::kMinDiff || offline != nullptr,
                ErrorCode::kInvalidArgument, "min-diff assignment needs an offline distance matrix");
}

void ClusterMaintainer::add_entries(std::span<const EntryId> fresh) {
  for (EntryId e : fresh) {
    cs_.grow_entries(static_cast<std::size_t>(e) + 1);
    pm_.grow_entries(static_cast<std::size_t>(e) + 1);
    stats_.track(e);
  }
}

std::vector<EntryId> ClusterMaintainer::pending_entries() const {
  std::vector<EntryId> out;
  for (EntryId e = 0; e < cs_.entry_count(); ++e) {
    if (stats_.tracking(e)) out.push_back(e);
  }
  return out;
}

std::vector<std::pair<EntryId, std::vector<Assignment>>> ClusterMaintainer::step(
    std::span<const EntryId> activated) {
  if (opts_.policy == AssignPolicy::kMinDiff) {
    for (EntryId e : activated) {
      if (!stats_.tracking(e) || first_context_.count(e) != 0) continue;
      auto& ctx = first_context_[e];
      for (EntryId x : activated) {
        if (x < offline_->size()) ctx.push_back(x);
      }
    }
  }
  stats_.observe(activated, clusters_with_active_medoid(cs_, activated));

  std::vector<std::pair<EntryId, std::vector<Assignment>>> out;
  for (EntryId e : stats_.ready_entries()) {
    out.emplace_back(e, assign(e));
    stats_.forget(e);
    first_context_.erase(e);
  }
  return out;
}

ClusterId ClusterMaintainer::smallest_cluster() const {
  ClusterId best = 0;
  for (const auto& c : cs_.clusters()) {
    if (c.members.size() < cs_.at(best).members.size()) best = c.id;
  }
  return best;
}

std::vector<Assignment> ClusterMaintainer::assign(EntryId e) {
  if (opts_.policy == AssignPolicy::kWindowed || cs_.size() == 0) {
    return assign_new_entry(e, stats_, cs_, pm_, opts_.tau);
  }
  ClusterId target = smallest_cluster();
  if (opts_.policy == AssignPolicy::kMinDiff) {
    auto it = first_context_.find(e);
    if (it != first_context_.end() && !it->second.empty()) {
      double best = 2.0;
      for (const auto& c : cs_.clusters()) {
        if (c.medoid >= offline_->size()) continue;
        double sum = 0.0;
        for (EntryId x : it->second) sum += (*offline_)(c.medoid, x);
        const double mean = sum / static_cast<double>(it->second.size());
        if (mean < best) {
          best = mean;
          target = c.id;
        }
      }
    }
  }
  return {join_cluster(e, target, new_entry_distance(stats_, e, target), cs_, pm_)};
}

// --- cache -----------------------------------------------------------------

void update_frequencies(CacheState& state, std::span<const ClusterId> activated,
                        std::span<const ClusterId> resident) {
  auto grow = [&](ClusterId c) {
    if (c >= state.freq.size()) state.freq.resize(static_cast<std::size_t>(c) + 1, 0);
  };
  for (ClusterId c : activated) {
    grow(c);
    ++state.freq[c];
  }
  for (ClusterId c : resident) {
    if (std::find(activated.begin(), activated.end(), c) != activated.end()) continue;
    grow(c);
    --state.freq[c];
  }
}

namespace {

struct Scorer {
  const CacheState& state;
  const ClusterSet& cs;
  const CacheScoreParams& p;

  double operator()(ClusterId c) const {
    const std::int64_t f = c < state.freq.size() ? state.freq[c] : 0;
    return cost_effectiveness(f, cs.at(c).members.size(), p);
  }
};

// Heap order: the top is the lowest score; among equal scores the higher id
// leaves first.
struct HeapAfter {
  const std::vector<double>* score;
  bool operator()(ClusterId a, ClusterId b) const {
    const double sa = (*score)[a];
    const double sb = (*score)[b];
    if (sa != sb) return sa > sb;
    return a < b;
  }
};

}  // namespace

Replacement cache_replace(CacheState& state, const ClusterSet& cs,
                          std::span<const ClusterId> candidates, std::size_t budget_entries,
                          const CacheScoreParams& p) {
  if (state.freq.size() < cs.size()) state.freq.resize(cs.size(), 0);
  const Scorer score_of{state, cs, p};
  std::vector<double> score(cs.size(), 0.0);
  std::vector<bool> resident(cs.size(), false);
  std::size_t used = 0;
  for (ClusterId c : state.heap) {
    score[c] = score_of(c);
    resident[c] = true;
    used += cs.at(c).members.size();
  }
  const HeapAfter after{&score};
  std::make_heap(state.heap.begin(), state.heap.end(), after);

  std::vector<ClusterId> order;
  for (ClusterId c : candidates) {
    if (c < cs.size() && !resident[c]) order.push_back(c);
  }
  std::sort(order.begin(), order.end());
  order.erase(std::unique(order.begin(), order.end()), order.end());
  for (ClusterId c : order) score[c] = score_of(c);
  std::stable_sort(order.begin(), order.end(),
                   [&](ClusterId a, ClusterId b) { return score[a] > score[b]; });

  Replacement out;
  auto push = [&](ClusterId c) {
    state.heap.push_back(c);
    std::push_heap(state.heap.begin(), state.heap.end(), after);
    used += cs.at(c).members.size();
  };
  for (ClusterId cand : order) {
    const std::size_t s = cs.at(cand).members.size();
    if (s > budget_entries) continue;
    std::vector<ClusterId> popped;
    while (used + s > budget_entries && !state.heap.empty() &&
           score[state.heap.front()] < score[cand]) {
      std::pop_heap(state.heap.begin(), state.heap.end(), after);
      popped.push_back(state.heap.back());
      state.heap.pop_back();
      used -= cs.at(popped.back()).members.size();
    }
    if (used + s <= budget_entries) {
      push(cand);
      out.admitted.push_back(cand);
      out.evicted.insert(out.evicted.end(), popped.begin(), popped.end());
    } else {
      for (ClusterId c : popped) push(c);
    }
  }
  return out;
}

ScoreCache::ScoreCache(const ClusterSet& cs, std::vector<std::int64_t> freq,
                       std::span<const ClusterId> initial, std::size_t budget_entries,
                       const CacheScoreParams& p)
    : budget_(budget_entries), params_(p) {
  state_.freq = std::move(freq);
  grow(cs.size());
  for (ClusterId c : initial) {
    KVSWARM_CHECK(c < cs.size(), ErrorCode::kInvalidArgument, "unknown cluster in initial cache");
    if (resident_[c]) continue;
    resident_[c] = true;
    state_.heap.push_back(c);
  }
  fit(cs);
}

void ScoreCache::grow(std::size_t n_clusters) {
  if (resident_.size() < n_clusters) resident_.resize(n_clusters, false);
  if (state_.freq.size() < n_clusters) state_.freq.resize(n_clusters, 0);
}

bool ScoreCache::contains(ClusterId c) const { return c < resident_.size() && resident_[c]; }

void ScoreCache::access(std::span<const ClusterId> activated, const ClusterSet& cs) {
  grow(cs.size());
  update_frequencies(state_, activated, state_.heap);
  const auto r = cache_replace(state_, cs, activated, budget_, params_);
  for (ClusterId c : r.evicted) resident_[c] = false;
  for (ClusterId c : r.admitted) resident_[c] = true;
}

void ScoreCache::fit(const ClusterSet& cs) {
  grow(cs.size());
  std::vector<double> score(cs.size(), 0.0);
  std::size_t used = 0;
  const Scorer score_of{state_, cs, params_};
  for (ClusterId c : state_.heap) {
    score[c] = score_of(c);
    used += cs.at(c).members.size();
  }
  const HeapAfter after{&score};
  std::make_heap(state_.heap.begin(), state_.heap.end(), after);
  while (used > budget_ && !state_.heap.empty()) {
    std::pop_heap(state_.heap.begin(), state_.heap.end(), after);
    const ClusterId c = state_.heap.back();
    state_.heap.pop_back();
    used -= cs.at(c).members.size();
    resident_[c] = false;
  }
}

std::vector<ClusterId> ScoreCache::residents() const {
  std::vector<ClusterId> out(state_.heap.begin(), state_.heap.end());
  std::sort(out.begin(), out.end());
  return out;
}

LruCache::LruCache(const ClusterSet& cs, std::span<const ClusterId> initial,
                   std::size_t budget_entries)
    : budget_(budget_entries) {
  for (ClusterId c : initial) {
    KVSWARM_CHECK(c < cs.size(), ErrorCode::kInvalidArgument, "unknown cluster in initial cache");
    if (where_.count(c) != 0) continue;
    order_.push_back(c);
    where_[c] = std::prev(order_.end());
  }
  fit(cs);
}

std::size_t LruCache::used(const ClusterSet& cs) const {
  std::size_t total = 0;
  for (ClusterId c : order_) total += cs.at(c).members.size();
  return total;
}

void LruCache::access(std::span<const ClusterId> activated, const ClusterSet& cs) {
  std::size_t in_use = used(cs);
  for (ClusterId c : activated) {
    auto it = where_.find(c);
    if (it != where_.end()) {
      order_.splice(order_.begin(), order_, it->second);
      continue;
    }
    const std::size_t s = cs.at(c).members.size();
    if (s > budget_) continue;
    while (in_use + s > budget_) {
      const ClusterId victim = order_.back();
      in_use -= cs.at(victim).members.size();
      where_.erase(victim);
      order_.pop_back();
    }
    order_.push_front(c);
    where_[c] = order_.begin();
    in_use += s;
  }
}

void LruCache::fit(const ClusterSet& cs) {
  std::size_t in_use = used(cs);
  while (in_use > budget_ && !order_.empty()) {
    const ClusterId victim = order_.back();
    in_use -= cs.at(victim).members.size();
    where_.erase(victim);
    order_.pop_back();
  }
}

std::vector<ClusterId> LruCache::residents() const {
  std::vector<ClusterId> out(order_.begin(), order_.end());
  std::sort(out.begin(), out.end());
  return out;
}

HitStats replay_cluster_stream(const ClusterSet& cs, std::span<const std::vector<ClusterId>> stream,
                               ClusterCache& cache) {
  HitStats stats;
  for (const auto& step : stream) {
    for (ClusterId c : step) {
      ++stats.accesses;
      if (cache.contains(c)) ++stats.hits;
    }
    cache.access(step, cs);
  }
  return stats;
}

}  // namespace kvswarm
