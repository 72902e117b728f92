// Copyright 2026 The kvswarm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "kvswarm/clustering.hpp"
#include "kvswarm/placement.hpp"
#include "kvswarm/trace.hpp"

// Line-oriented text formats. Every file starts with a header line, followed
// by a `# kvswarm <version> config=<hash>` provenance comment when written by
// this library. Readers skip blank lines and lines starting with '#'.
// Id lists are comma separated; an empty list is written as `-`.

namespace kvswarm {

/// `kvtrace 1 <initial_entries>` then `step <idx> new=<ids> act=<ids>`.
std::string write_trace(const ActivationTrace& trace, std::string_view config_hash);
ActivationTrace parse_trace(std::string_view text);

/// `kvgroups 1 <n_groups>` then `group <id> members=<ids>`.
std::string write_groups(const std::vector<std::vector<EntryId>>& groups,
                         std::string_view config_hash);
std::vector<std::vector<EntryId>> parse_groups(std::string_view text);

/// `kvclust 1 <tau> <n_entries> <n_clusters>` then
/// `cluster <id> medoid=<id> members=<ids>` (members in insertion order).
std::string write_clusters(const ClusterSet& cs, std::string_view config_hash);
ClusterSet parse_clusters(std::string_view text);

/// `kvplace 1 <n_disk>` then `entry <id> replicas=<dev:slot,...>`.
std::string write_placement(const PlacementMap& pm, std::string_view config_hash);

/// `kvdram 1 <window_capacity> <budget_entries>` then one `medoid` line per
/// cluster, one `window` line and one `hot` line.
std::string write_dram_plan(const DramPlan& plan, std::string_view config_hash);

/// Whole-file helpers; failures raise Error(kIo).
std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

}  // namespace kvswarm
