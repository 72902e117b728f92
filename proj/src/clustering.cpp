// Copyright 2026 The kvswarm Authors
// SPDX-License-Identifier: Apache-2.0

#include "kvswarm/clustering.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "kvswarm/error.hpp"

namespace kvswarm {

ClusterSet::ClusterSet(double tau, std::size_t n_entries) : tau_(tau), replication_(n_entries) {}

const Cluster& ClusterSet::at(ClusterId id) const {
  KVSWARM_CHECK(id < clusters_.size(), ErrorCode::kInvalidArgument,
                "unknown cluster id " + std::to_string(id));
  return clusters_[id];
}

std::span<const ClusterId> ClusterSet::replicas_of(EntryId e) const {
  if (e >= replication_.size()) return {};
  return replication_[e];
}

ClusterId ClusterSet::add_cluster(EntryId medoid) {
  KVSWARM_CHECK(medoid < replication_.size(), ErrorCode::kInvalidArgument,
                "medoid outside entry domain");
  const auto id = static_cast<ClusterId>(clusters_.size());
  Cluster c;
  c.id = id;
  c.medoid = medoid;
  clusters_.push_back(std::move(c));
  add_member(id, medoid, 0.0);
  return id;
}

void ClusterSet::add_member(ClusterId id, EntryId e, double admission_distance) {
  KVSWARM_CHECK(id < clusters_.size(), ErrorCode::kInvalidArgument, "unknown cluster id");
  KVSWARM_CHECK(e < replication_.size(), ErrorCode::kInvalidArgument,
                "entry outside entry domain");
  auto& reps = replication_[e];
  KVSWARM_CHECK(!std::binary_search(reps.begin(), reps.end(), id), ErrorCode::kInvalidArgument,
                "entry already a member of cluster");
  auto& c = clusters_[id];
  c.members.push_back(e);
  c.admission_distance.push_back(admission_distance);
  // Cluster ids only grow, but an entry can join an older cluster late.
  reps.insert(std::upper_bound(reps.begin(), reps.end(), id), id);
  ++total_members_;
}

void ClusterSet::grow_entries(std::size_t n_entries) {
  if (n_entries > replication_.size()) replication_.resize(n_entries);
}

void ClusterSet::check_coverage(std::span<const EntryId> entries) const {
  for (EntryId e : entries) {
    KVSWARM_CHECK(!replicas_of(e).empty(), ErrorCode::kInconsistent,
                  "entry " + std::to_string(e) + " is not covered by any cluster");
  }
}

std::vector<std::uint32_t> coactivation_density(std::span<const EntryId> entries,
                                                const DistanceMatrix& dist, double tau) {
  KVSWARM_CHECK(tau > 0.0 && tau < 1.0, ErrorCode::kInvalidArgument,
                "cluster radius must lie in (0,1)");
  std::vector<std::uint32_t> rho(entries.size(), 0);
  for (std::size_t a = 0; a < entries.size(); ++a) {
    for (std::size_t b = a + 1; b < entries.size(); ++b) {
      if (dist(entries[a], entries[b]) <= tau) {
        ++rho[a];
        ++rho[b];
      }
    }
  }
  return rho;
}

namespace {

std::vector<EntryId> all_entries(std::size_t n) {
  std::vector<EntryId> ids(n);
  std::iota(ids.begin(), ids.end(), EntryId{0});
  return ids;
}

}  // namespace

std::vector<std::uint32_t> coactivation_density(const DistanceMatrix& dist, double tau) {
  const auto ids = all_entries(dist.size());
  return coactivation_density(ids, dist, tau);
}

ClusterSet build_clusters(std::span<const EntryId> entry_span, const DistanceMatrix& dist,
                          const ClusteringOptions& options) {
  const double tau = options.tau;
  std::vector<EntryId> entries(entry_span.begin(), entry_span.end());
  std::sort(entries.begin(), entries.end());
  entries.erase(std::unique(entries.begin(), entries.end()), entries.end());
  KVSWARM_CHECK(entries.empty() || entries.back() < dist.size(), ErrorCode::kInvalidArgument,
                "entry outside distance matrix");
  const auto rho = coactivation_density(entries, dist, tau);

  std::vector<std::size_t> medoid_queue(entries.size());
  std::iota(medoid_queue.begin(), medoid_queue.end(), std::size_t{0});
  std::stable_sort(medoid_queue.begin(), medoid_queue.end(),
                   [&](std::size_t a, std::size_t b) { return rho[a] > rho[b]; });

  ClusterSet cs(tau, dist.size());
  std::vector<bool> covered(dist.size(), false);
  std::size_t uncovered = entries.size();

  struct Candidate {
    double dist;
    EntryId id;
  };
  std::vector<Candidate> queue;
  for (std::size_t qi : medoid_queue) {
    if (uncovered == 0) break;
    const EntryId medoid = entries[qi];
    if (covered[medoid]) continue;

    queue.clear();
    for (EntryId e : entries) {
      if (e == medoid) continue;
      const double d = dist(medoid, e);
      if (d <= tau) queue.push_back({d, e});
    }
    std::sort(queue.begin(), queue.end(), [](const Candidate& a, const Candidate& b) {
      if (a.dist != b.dist) return a.dist < b.dist;
      return a.id < b.id;
    });

    const ClusterId id = cs.add_cluster(medoid);
    for (const auto& cand : queue) {
      if (options.max_replicas && cs.replicas_of(cand.id).size() >= *options.max_replicas) {
        continue;
      }
      const auto& members = cs.at(id).members;
      double sum = 0.0;
      for (EntryId m : members) sum += dist(cand.id, m);
      const double avg = sum / static_cast<double>(members.size());
      if (avg <= tau) cs.add_member(id, cand.id, avg);
    }
    for (EntryId m : cs.at(id).members) {
      if (!covered[m]) {
        covered[m] = true;
        --uncovered;
      }
    }
  }
  return cs;
}

ClusterSet build_clusters(const DistanceMatrix& dist, const ClusteringOptions& options) {
  const auto ids = all_entries(dist.size());
  return build_clusters(ids, dist, options);
}

std::vector<double> cluster_quality(const ClusterSet& cs, const DistanceMatrix& dist) {
  std::vector<double> quality;
  quality.reserve(cs.size());
  for (const auto& c : cs.clusters()) {
    double sum = 0.0;
    std::size_t n = 0;
    for (EntryId m : c.members) {
      if (m == c.medoid) continue;
      KVSWARM_CHECK(m < dist.size() && c.medoid < dist.size(), ErrorCode::kInconsistent,
                    "cluster member outside distance matrix");
      sum += dist(m, c.medoid);
      ++n;
    }
    quality.push_back(n == 0 ? 0.0 : sum / static_cast<double>(n));
  }
  return quality;
}

double pooled_member_distance(const ClusterSet& cs, const DistanceMatrix& dist) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& c : cs.clusters()) {
    for (EntryId m : c.members) {
      if (m == c.medoid) continue;
      sum += dist(m, c.medoid);
      ++n;
    }
  }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

ReplicationStats replication_stats(const ClusterSet& cs) {
  ReplicationStats s;
  std::size_t memberships = 0;
  for (std::size_t e = 0; e < cs.entry_count(); ++e) {
    const std::size_t r = cs.replicas_of(static_cast<EntryId>(e)).size();
    if (r == 0) continue;
    ++s.covered_entries;
    memberships += r;
    if (r >= 2) ++s.replicated_entries;
    s.max_replication = std::max(s.max_replication, r);
  }
  if (s.covered_entries > 0) {
    s.mean_replication = static_cast<double>(memberships) / static_cast<double>(s.covered_entries);
  }
  return s;
}

std::vector<ClusterId> activated_clusters(const ClusterSet& cs, std::span<const EntryId> activated,
                                          Selection selection) {
  std::vector<ClusterId> out;
  if (selection == Selection::kOracle) {
    for (EntryId e : activated) {
      const auto reps = cs.replicas_of(e);
      out.insert(out.end(), reps.begin(), reps.end());
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }
  for (const auto& c : cs.clusters()) {
    if (std::binary_search(activated.begin(), activated.end(), c.medoid)) out.push_back(c.id);
  }
  return out;
}

}  // namespace kvswarm
