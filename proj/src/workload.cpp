// Copyright 2026 The kvswarm Authors
// SPDX-License-Identifier: Apache-2.0

#include "kvswarm/workload.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <random>
#include <string>

#include "kvswarm/error.hpp"

namespace kvswarm {

void PlantedSpec::validate() const {
  KVSWARM_CHECK(n_entries >= 1, ErrorCode::kInvalidArgument, "entries must be positive");
  KVSWARM_CHECK(n_groups >= 1 && n_groups <= n_entries, ErrorCode::kInvalidArgument,
                "groups must lie in [1, entries]");
  KVSWARM_CHECK(sparsity > 0.0 && sparsity <= 1.0, ErrorCode::kInvalidArgument,
                "sparsity must lie in (0,1]");
  KVSWARM_CHECK(noise >= 0.0 && noise <= 1.0, ErrorCode::kInvalidArgument,
                "noise must lie in [0,1]");
  KVSWARM_CHECK(group_overlap >= 0.0 && group_overlap <= 1.0, ErrorCode::kInvalidArgument,
                "overlap must lie in [0,1]");
  KVSWARM_CHECK(zipf >= 0.0, ErrorCode::kInvalidArgument, "zipf exponent must be non-negative");
  KVSWARM_CHECK(steps + decode_steps + tail_steps >= 1, ErrorCode::kInvalidArgument,
                "trace needs at least one step");
}

namespace {

std::discrete_distribution<std::size_t> zipf_distribution(std::size_t n, double exponent) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = 1.0 / std::pow(static_cast<double>(i + 1), exponent);
  return std::discrete_distribution<std::size_t>(w.begin(), w.end());
}

// Adds up to `room` entries of `members` not yet in `active`; picks a random
// subset when they do not all fit.
void add_group(const std::vector<EntryId>& members, std::size_t room, std::vector<bool>& active,
               std::vector<EntryId>& out, std::mt19937_64& rng) {
  std::vector<EntryId> fresh;
  for (EntryId e : members) {
    if (!active[e]) fresh.push_back(e);
  }
  if (fresh.size() > room) {
    std::shuffle(fresh.begin(), fresh.end(), rng);
    fresh.resize(room);
  }
  for (EntryId e : fresh) {
    active[e] = true;
    out.push_back(e);
  }
}

}  // namespace

PlantedTrace generate(const PlantedSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  const std::size_t n = spec.n_entries;
  const std::size_t g_count = spec.n_groups;

  std::vector<std::vector<EntryId>> groups(g_count);
  std::vector<std::size_t> bounds(g_count + 1);
  for (std::size_t g = 0; g <= g_count; ++g) bounds[g] = g * n / g_count;
  for (std::size_t g = 0; g < g_count; ++g) {
    for (std::size_t e = bounds[g]; e < bounds[g + 1]; ++e) groups[g].push_back(static_cast<EntryId>(e));
    if (g + 1 < g_count) {
      const std::size_t next = bounds[g + 2] - bounds[g + 1];
      const auto shared = static_cast<std::size_t>(std::llround(spec.group_overlap * next));
      for (std::size_t k = 0; k < shared; ++k) {
        groups[g].push_back(static_cast<EntryId>(bounds[g + 1] + k));
      }
    }
  }

  auto primary_dist = zipf_distribution(g_count, spec.zipf);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick_group(0, g_count - 1);

  const std::size_t total_steps = spec.steps + spec.decode_steps + spec.tail_steps;
  std::vector<ActivationStep> steps;
  steps.reserve(total_steps);
  std::size_t count = n;
  std::vector<std::size_t> companions;
  for (std::size_t t = 0; t < total_steps; ++t) {
    ActivationStep step;
    const bool decoding = t >= spec.steps && t < spec.steps + spec.decode_steps;
    std::vector<std::size_t> affiliation;
    if (decoding) {
      for (std::size_t k = 0; k < spec.new_per_step; ++k) {
        step.new_entries.push_back(static_cast<EntryId>(count + k));
        affiliation.push_back(pick_group(rng));
      }
    }
    const std::size_t visible = count;  // this step's new entries are not yet activatable
    count += step.new_entries.size();

    const auto budget = std::max<std::size_t>(
        1, std::min(visible, static_cast<std::size_t>(std::llround(spec.sparsity * count))));
    std::vector<bool> active(count, false);
    std::vector<EntryId> act;
    const std::size_t primary = primary_dist(rng);
    add_group(groups[primary], budget, active, act, rng);

    companions.clear();
    for (std::size_t g = 0; g < g_count; ++g) {
      if (g != primary) companions.push_back(g);
    }
    std::shuffle(companions.begin(), companions.end(), rng);
    for (std::size_t g : companions) {
      if (act.size() >= budget) break;
      add_group(groups[g], budget - act.size(), active, act, rng);
    }

    std::uniform_int_distribution<EntryId> any_entry(0, static_cast<EntryId>(visible - 1));
    if (spec.noise > 0.0 && act.size() < visible) {
      for (auto& e : act) {
        if (unit(rng) >= spec.noise) continue;
        EntryId r;
        do {
          r = any_entry(rng);
        } while (active[r]);
        active[e] = false;
        active[r] = true;
        e = r;
      }
    }
    step.activated = std::move(act);
    steps.push_back(std::move(step));

    for (std::size_t k = 0; k < affiliation.size(); ++k) {
      groups[affiliation[k]].push_back(steps.back().new_entries[k]);
    }
  }

  PlantedTrace out;
  out.trace = ActivationTrace(n, std::move(steps));
  for (auto& g : groups) std::sort(g.begin(), g.end());
  out.groups = std::move(groups);
  return out;
}

double set_agreement(const std::vector<std::vector<EntryId>>& groups, const ClusterSet& cs) {
  if (groups.empty()) return 0.0;
  std::vector<std::vector<EntryId>> sorted;
  sorted.reserve(cs.size());
  for (const auto& c : cs.clusters()) {
    auto m = c.members;
    std::sort(m.begin(), m.end());
    sorted.push_back(std::move(m));
  }
  double total = 0.0;
  std::vector<EntryId> both;
  for (const auto& g : groups) {
    double best = 0.0;
    for (const auto& m : sorted) {
      both.clear();
      std::set_intersection(g.begin(), g.end(), m.begin(), m.end(), std::back_inserter(both));
      if (both.empty()) continue;
      const double uni = static_cast<double>(g.size() + m.size() - both.size());
      best = std::max(best, static_cast<double>(both.size()) / uni);
    }
    total += best;
  }
  return total / static_cast<double>(groups.size());
}

ClusterStream generate_cluster_stream(const ClusterStreamSpec& spec) {
  KVSWARM_CHECK(spec.n_clusters >= 2, ErrorCode::kInvalidArgument, "need at least two clusters");
  KVSWARM_CHECK(spec.min_size >= 1 && spec.min_size <= spec.max_size, ErrorCode::kInvalidArgument,
                "cluster size range is empty");
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> log_size(std::log(static_cast<double>(spec.min_size)),
                                                  std::log(static_cast<double>(spec.max_size) + 1.0));
  std::vector<std::size_t> sizes(spec.n_clusters);
  std::size_t total = 0;
  for (auto& s : sizes) {
    s = std::clamp<std::size_t>(static_cast<std::size_t>(std::exp(log_size(rng))), spec.min_size,
                                spec.max_size);
    total += s;
  }
  ClusterStream out;
  out.clusters = ClusterSet(1.0, total);
  EntryId next = 0;
  for (std::size_t s : sizes) {
    const ClusterId id = out.clusters.add_cluster(next++);
    for (std::size_t k = 1; k < s; ++k) out.clusters.add_member(id, next++, 0.0);
  }

  auto popularity = zipf_distribution(spec.n_clusters, spec.zipf);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  out.steps.reserve(spec.steps);
  for (std::size_t t = 0; t < spec.steps; ++t) {
    std::vector<ClusterId> step{static_cast<ClusterId>(popularity(rng))};
    if (unit(rng) < spec.second_cluster) {
      const auto second = static_cast<ClusterId>(popularity(rng));
      if (second != step.front()) step.push_back(second);
    }
    std::sort(step.begin(), step.end());
    out.steps.push_back(std::move(step));
  }
  return out;
}

}  // namespace kvswarm
