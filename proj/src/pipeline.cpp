// Copyright 2026 The kvswarm Authors
// SPDX-License-Identifier: Apache-2.0

#include "kvswarm/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <memory>
#include <optional>
#include <thread>

#include "json.hpp"
#include "kvswarm/clustering.hpp"
#include "kvswarm/error.hpp"
#include "kvswarm/formats.hpp"
#include "kvswarm/placement.hpp"
#include "kvswarm/storage_sim.hpp"
#include "kvswarm/trace.hpp"
#include "kvswarm/types.hpp"
#include "kvswarm/workload.hpp"
#include "svg.hpp"

namespace kvswarm {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

// ---------------------------------------------------------------------------
// Option schema

const std::vector<OptionSpec>& generator_options() {
  static const std::vector<OptionSpec> opts = {
      {"overlap", "0", "Share of the next group's head each group also owns, in [0,1]"},
      {"noise", "0.02", "Chance an activated entry is swapped for a uniform one"},
      {"steps", "2000", "Profiling steps (no new entries)"},
      {"decode_steps", "0", "Steps that each append new entries"},
      {"new_per_step", "1", "Entries appended per decode step"},
      {"tail_steps", "0", "Steps after decoding with no new entries"},
      {"zipf", "1.0", "Popularity exponent of the primary group per step"},
      {"seed", "1", "Generator seed (KVSWARM_SEED overrides the config file)"},
  };
  return opts;
}

const std::vector<OptionSpec>& clustering_options() {
  static const std::vector<OptionSpec> opts = {
      {"tau", "", "Cluster radius in (0,1); when unset it is calibrated"},
      {"calibrate", "0.05",
       "Calibrated radius admits pairs co-activated in at least this fraction of profiling steps"},
      {"normalization", "global-sum", "Co-activation normalizer: global-sum or row-max"},
      {"max_replicas", "0", "Cap on clusters per entry; 0 means unlimited"},
      {"profile_steps", "auto", "Steps used for clustering; auto = leading steps without new entries"},
  };
  return opts;
}

const std::vector<OptionSpec>& device_options() {
  static const std::vector<OptionSpec> opts = {
      {"device", "pm9a3", "Device preset: pm9a3 or optane_900p"},
      {"model", "qwen3-32b", "Model preset that fixes the per-entry size"},
      {"entry_size", "0", "Bytes per entry; 0 takes the size from the model preset"},
      {"window", "256", "Local window size in entries"},
      {"cache_ratio", "0.05", "Hot-cluster budget as a fraction of clustered entries"},
      {"selection", "oracle", "Cluster selection: oracle (any member activated) or medoid"},
  };
  return opts;
}

std::vector<OptionSpec> concat(std::initializer_list<std::vector<OptionSpec>> parts) {
  std::vector<OptionSpec> out;
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

const std::map<std::string, std::vector<OptionSpec>, std::less<>>& schema() {
  static const std::map<std::string, std::vector<OptionSpec>, std::less<>> table = [] {
    std::map<std::string, std::vector<OptionSpec>, std::less<>> t;
    t["gen"] = concat({
        {{"entries", "", "Initial number of entries", true},
         {"groups", "", "Number of planted groups", true},
         {"sparsity", "0.1", "Activated fraction of the current entries per step"}},
        generator_options(),
        {{"out", ".", "Output directory"}},
    });
    t["cluster"] = concat({
        {{"trace", "", "Trace file (kvtrace)", true}},
        clustering_options(),
        {{"out", ".", "Output directory"}},
    });
    t["place"] = concat({
        {{"trace", "", "Trace file (kvtrace)", true},
         {"clusters", "", "Cluster file (kvclust)", true},
         {"disks", "4", "Number of devices"},
         {"placement", "global", "Cluster start device: global (rotating pointer) or single"},
         {"profile_steps", "auto", "Steps the clusters were built from; auto = leading steps without new entries"}},
        device_options(),
        {{"out", ".", "Output directory"}},
    });
    t["simulate"] = concat({
        {{"trace", "", "Trace file; omit to generate one from entries/groups"},
         {"clusters", "", "Cluster file; omit to cluster the trace"},
         {"modes", "swarm,static,no_balance,no_dedup,no_cluster", "Comma list of retrieval modes"},
         {"disks", "4", "Device count, list (1,2,4) or range (1..8, 1..8:2)"},
         {"entries", "", "Generator: initial entries"},
         {"groups", "", "Generator: planted groups"},
         {"sparsity", "", "Generator: activated fraction, list or range (0.02..0.2)"}},
        generator_options(),
        clustering_options(),
        device_options(),
        {{"addressing", "per_step", "Addressing charge: per_step or per_entry"},
         {"cache_policy", "score", "DRAM cluster cache: score, lru or none"},
         {"assign", "windowed", "New-entry assignment: windowed, min_size or min_diff"},
         {"adapt_tau", "0.95", "Radius for new-entry assignment, in (0,1)"},
         {"start_step", "0", "First simulated step"},
         {"jobs", "1", "Worker threads for sweeps"},
         {"emit_plots", "false", "Also write SVG charts"},
         {"out", ".", "Parent directory of the run directory"}},
    });
    t["report"] = {
        {"run", "", "Run directory written by simulate", true},
        {"emit_plots", "false", "Write SVG charts into the run directory"},
    };
    return t;
  }();
  return table;
}

// Keys naming input files whose content feeds the config hash.
bool is_input_file(const std::string& key) { return key == "trace" || key == "clusters"; }

bool excluded_from_hash(const std::string& key) {
  return key == "out" || key == "jobs" || key == "emit_plots";
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string normalize_key(std::string key) {
  std::replace(key.begin(), key.end(), '-', '_');
  return key;
}

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> out;
  while (true) {
    const std::size_t p = text.find(sep);
    out.push_back(trim(text.substr(0, p)));
    if (p == std::string_view::npos) break;
    text = text.substr(p + 1);
  }
  return out;
}

std::optional<std::int64_t> to_int(const std::string& s) {
  if (s.empty()) return std::nullopt;
  char* end = nullptr;
  errno = 0;
  const long long v = std::strtoll(s.c_str(), &end, 10);
  if (errno != 0 || end != s.c_str() + s.size()) return std::nullopt;
  return v;
}

std::optional<double> to_real(const std::string& s) {
  if (s.empty()) return std::nullopt;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::string hex16(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

std::uint64_t fnv1a(std::string_view data, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::vector<std::int64_t> parse_int_range(std::string_view text) {
  const std::string s = trim(text);
  std::vector<std::int64_t> out;
  const std::size_t dots = s.find("..");
  if (dots == std::string::npos) {
    for (const auto& part : split(s, ',')) {
      const auto v = to_int(part);
      if (!v) fail(ErrorCode::kUsage, "expected an integer list, got '" + s + "'");
      out.push_back(*v);
    }
    return out;
  }
  const std::string lo = s.substr(0, dots);
  std::string hi = s.substr(dots + 2);
  std::int64_t step = 1;
  if (const std::size_t colon = hi.find(':'); colon != std::string::npos) {
    const auto st = to_int(hi.substr(colon + 1));
    if (!st || *st <= 0) fail(ErrorCode::kUsage, "range step must be a positive integer in '" + s + "'");
    step = *st;
    hi = hi.substr(0, colon);
  }
  const auto a = to_int(lo), b = to_int(hi);
  if (!a || !b || *b < *a) fail(ErrorCode::kUsage, "malformed integer range '" + s + "'");
  for (std::int64_t v = *a; v <= *b; v += step) out.push_back(v);
  return out;
}

std::vector<double> parse_real_range(std::string_view text) {
  const std::string s = trim(text);
  std::vector<double> out;
  const std::size_t dots = s.find("..");
  if (dots == std::string::npos) {
    for (const auto& part : split(s, ',')) {
      const auto v = to_real(part);
      if (!v) fail(ErrorCode::kUsage, "expected a number list, got '" + s + "'");
      out.push_back(*v);
    }
    return out;
  }
  const std::string lo = s.substr(0, dots);
  std::string hi = s.substr(dots + 2);
  std::optional<double> step;
  if (const std::size_t colon = hi.find(':'); colon != std::string::npos) {
    step = to_real(hi.substr(colon + 1));
    if (!step || *step <= 0) fail(ErrorCode::kUsage, "range step must be positive in '" + s + "'");
    hi = hi.substr(0, colon);
  }
  const auto a = to_real(lo), b = to_real(hi);
  if (!a || !b || *b < *a) fail(ErrorCode::kUsage, "malformed range '" + s + "'");
  if (!step) step = *a;
  if (*step <= 0) fail(ErrorCode::kUsage, "range '" + s + "' needs an explicit positive step");
  const auto count = static_cast<std::int64_t>(std::floor((*b - *a) / *step + 1e-9)) + 1;
  for (std::int64_t i = 0; i < count; ++i) {
    // Round away accumulated binary noise so 0.02*3 prints as 0.06.
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", *a + static_cast<double>(i) * *step);
    out.push_back(std::strtod(buf, nullptr));
  }
  return out;
}

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"gen", "cluster", "place", "simulate", "report"};
  return names;
}

const std::vector<OptionSpec>& command_options(std::string_view command) {
  const auto it = schema().find(command);
  if (it == schema().end()) fail(ErrorCode::kUsage, "unknown command '" + std::string(command) + "'");
  return it->second;
}

Config::Config(std::string command) : command_(std::move(command)) { command_options(command_); }

const OptionSpec& Config::spec(const std::string& key) const {
  for (const auto& o : command_options(command_)) {
    if (o.name == key) return o;
  }
  fail(ErrorCode::kUsage, "unknown option '" + key + "' for command '" + command_ + "'");
}

void Config::set(const std::string& key, const std::string& value) {
  const std::string k = normalize_key(key);
  spec(k);
  values_[k] = value;
}

void Config::load_text(std::string_view text) {
  std::size_t number = 0;
  for (const auto& raw : split(text, '\n')) {
    ++number;
    std::string line = raw;
    if (const std::size_t hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      fail(ErrorCode::kUsage, "config line " + std::to_string(number) + ": expected 'key = value'");
    }
    try {
      set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const Error& e) {
      fail(ErrorCode::kUsage, "config line " + std::to_string(number) + ": " + e.what());
    }
  }
}

std::string Config::get(const std::string& key) const {
  const auto it = values_.find(key);
  return it != values_.end() ? it->second : spec(key).default_value;
}

std::int64_t Config::get_int(const std::string& key) const {
  const auto v = to_int(get(key));
  if (!v) fail(ErrorCode::kUsage, "option '" + key + "' expects an integer, got '" + get(key) + "'");
  return *v;
}

double Config::get_real(const std::string& key) const {
  const auto v = to_real(get(key));
  if (!v) fail(ErrorCode::kUsage, "option '" + key + "' expects a number, got '" + get(key) + "'");
  return *v;
}

bool Config::get_bool(const std::string& key) const {
  std::string v = get(key);
  std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off" || v.empty()) return false;
  fail(ErrorCode::kUsage, "option '" + key + "' expects true or false, got '" + get(key) + "'");
}

void Config::check_required() const {
  for (const auto& o : command_options(command_)) {
    if (o.required && get(o.name).empty()) {
      fail(ErrorCode::kUsage, "missing required option --" + o.name);
    }
  }
}

std::map<std::string, std::string> Config::effective() const {
  std::map<std::string, std::string> out;
  for (const auto& o : command_options(command_)) out[o.name] = get(o.name);
  return out;
}

std::string Config::hash() const {
  std::uint64_t h = fnv1a(command_ + "\n");
  for (const auto& [key, value] : effective()) {
    if (excluded_from_hash(key)) continue;
    if (command_ == "report" && key == "run") continue;
    if (is_input_file(key)) {
      // inputs are identified by content, not location
      h = fnv1a(key + (value.empty() ? "=\n" : "=<file>\n"), h);
      if (!value.empty()) h = fnv1a(read_file(value), h);
      continue;
    }
    h = fnv1a(key + "=" + value + "\n", h);
  }
  if (command_ == "report") h = fnv1a(read_file((fs::path(get("run")) / "summary.json").string()), h);
  return hex16(h);
}

namespace {

// ---------------------------------------------------------------------------
// Shared helpers

std::size_t positive(const Config& cfg, const std::string& key) {
  const auto v = cfg.get_int(key);
  if (v < 1) fail(ErrorCode::kUsage, "option '" + key + "' must be at least 1");
  return static_cast<std::size_t>(v);
}

std::size_t non_negative(const Config& cfg, const std::string& key) {
  const auto v = cfg.get_int(key);
  if (v < 0) fail(ErrorCode::kUsage, "option '" + key + "' must be non-negative");
  return static_cast<std::size_t>(v);
}

double unit_open(const Config& cfg, const std::string& key) {
  const double v = cfg.get_real(key);
  if (!(v > 0.0 && v < 1.0)) fail(ErrorCode::kUsage, "option '" + key + "' must lie in (0,1)");
  return v;
}

PlantedSpec planted_spec(const Config& cfg, double sparsity) {
  PlantedSpec s;
  s.n_entries = positive(cfg, "entries");
  s.n_groups = positive(cfg, "groups");
  s.group_overlap = cfg.get_real("overlap");
  s.sparsity = sparsity;
  s.noise = cfg.get_real("noise");
  s.steps = non_negative(cfg, "steps");
  s.decode_steps = non_negative(cfg, "decode_steps");
  s.new_per_step = non_negative(cfg, "new_per_step");
  s.tail_steps = non_negative(cfg, "tail_steps");
  s.zipf = cfg.get_real("zipf");
  s.seed = static_cast<std::uint64_t>(cfg.get_int("seed"));
  s.validate();
  return s;
}

Normalization normalization(const Config& cfg) {
  const auto v = cfg.get("normalization");
  if (v == "global-sum") return Normalization::kGlobalSum;
  if (v == "row-max") return Normalization::kRowMax;
  fail(ErrorCode::kUsage, "normalization must be global-sum or row-max");
}

Selection selection(const Config& cfg) {
  const auto v = cfg.get("selection");
  if (v == "oracle") return Selection::kOracle;
  if (v == "medoid") return Selection::kMedoid;
  fail(ErrorCode::kUsage, "selection must be oracle or medoid");
}

std::size_t profile_steps(const Config& cfg, const ActivationTrace& trace) {
  if (trace.step_count() == 0) fail(ErrorCode::kInvalidArgument, "trace has no steps");
  if (cfg.get("profile_steps") == "auto") {
    const std::size_t p = trace.prefill_steps();
    return p > 0 ? p : trace.step_count();
  }
  const std::size_t p = positive(cfg, "profile_steps");
  if (p > trace.step_count()) {
    fail(ErrorCode::kInvalidArgument, "profile_steps exceeds the trace length (" +
                                          std::to_string(trace.step_count()) + " steps)");
  }
  return p;
}

struct Clustered {
  ActivationTrace profile;
  std::shared_ptr<DistanceMatrix> dist;
  ClusterSet cs;
};

DistanceMatrix profile_distances(const ActivationTrace& profile, Normalization norm,
                                 AdjacencyMatrix* adj_out = nullptr) {
  try {
    auto adj = build_adjacency(profile);
    auto dist = build_distance_matrix(adj, norm);
    if (adj_out) *adj_out = std::move(adj);
    return dist;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kZeroDenominator) throw;
    fail(ErrorCode::kZeroDenominator,
         std::string(e.what()) + "; increase the number of profiling steps or the sparsity");
  }
}

Clustered cluster_trace(const Config& cfg, const ActivationTrace& trace) {
  Clustered out;
  out.profile = trace.prefix(profile_steps(cfg, trace));
  AdjacencyMatrix adj(0);
  out.dist = std::make_shared<DistanceMatrix>(profile_distances(out.profile, normalization(cfg), &adj));
  ClusteringOptions opts;
  if (!cfg.get("tau").empty()) {
    opts.tau = unit_open(cfg, "tau");
  } else {
    const double ratio = cfg.get_real("calibrate");
    if (!(ratio > 0.0 && ratio <= 1.0)) fail(ErrorCode::kUsage, "calibrate must lie in (0,1]");
    opts.tau = tau_for_min_count(adj, ratio * static_cast<double>(out.profile.step_count()),
                                 normalization(cfg));
    if (!(opts.tau > 0.0 && opts.tau < 1.0)) {
      fail(ErrorCode::kInvalidArgument,
           "calibrated radius " + format_double(opts.tau) +
               " lies outside (0,1); lower calibrate or pass tau explicitly");
    }
  }
  if (const auto cap = non_negative(cfg, "max_replicas"); cap > 0) opts.max_replicas = cap;
  out.cs = build_clusters(*out.dist, opts);
  return out;
}

// Profile of a trace that a loaded cluster set must match exactly.
ActivationTrace matching_profile(const Config& cfg, const ActivationTrace& trace, const ClusterSet& cs) {
  auto profile = trace.prefix(profile_steps(cfg, trace));
  if (profile.entry_count() != cs.entry_count()) {
    fail(ErrorCode::kInconsistent,
         "cluster file covers " + std::to_string(cs.entry_count()) + " entries but the profile has " +
             std::to_string(profile.entry_count()) + "; check profile_steps");
  }
  return profile;
}

SimConfig sim_config(const Config& cfg) {
  SimConfig sc;
  sc.device = DeviceModel::preset(cfg.get("device"));
  const auto explicit_size = non_negative(cfg, "entry_size");
  sc.entry_size = explicit_size > 0 ? explicit_size : model_entry_size(cfg.get("model"));
  return sc;
}

std::size_t cache_budget(const Config& cfg, const ClusterSet& cs) {
  const double ratio = cfg.get_real("cache_ratio");
  if (!(ratio >= 0.0 && ratio <= 1.0)) fail(ErrorCode::kUsage, "cache_ratio must lie in [0,1]");
  return static_cast<std::size_t>(std::llround(ratio * static_cast<double>(cs.entry_count())));
}

fs::path ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorCode::kIo, "cannot create directory '" + dir + "': " + ec.message());
  return fs::path(dir);
}

std::string provenance_comment(const std::string& hash) {
  return std::string("# kvswarm ") + kVersion + " config=" + hash + "\n";
}

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

// ---------------------------------------------------------------------------
// gen

std::string run_gen(const Config& cfg, const std::string& hash) {
  const auto spec = planted_spec(cfg, cfg.get_real("sparsity"));
  const auto planted = generate(spec);
  const auto dir = ensure_dir(cfg.get("out"));
  const auto trace_path = (dir / "trace.kvtrace").string();
  const auto groups_path = (dir / "groups.kvgroups").string();
  write_file(trace_path, write_trace(planted.trace, hash));
  write_file(groups_path, write_groups(planted.groups, hash));
  std::string out = "config " + hash + "\n";
  out += "entries: " + std::to_string(planted.trace.entry_count()) + " (" +
         std::to_string(planted.trace.initial_entries()) + " initial)\n";
  out += "steps: " + std::to_string(planted.trace.step_count()) + "\n";
  out += "wrote " + trace_path + "\nwrote " + groups_path + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// cluster

std::string run_cluster(const Config& cfg, const std::string& hash) {
  const auto trace = parse_trace(read_file(cfg.get("trace")));
  const auto c = cluster_trace(cfg, trace);
  const auto stats = replication_stats(c.cs);
  const auto quality = cluster_quality(c.cs, *c.dist);
  double q_sum = 0.0;
  std::size_t q_n = 0;
  for (const auto& cl : c.cs.clusters()) {
    if (cl.members.size() < 2) continue;
    q_sum += quality[cl.id];
    ++q_n;
  }
  const auto dir = ensure_dir(cfg.get("out"));
  const auto path = (dir / "clusters.kvclust").string();
  write_file(path, write_clusters(c.cs, hash));

  std::string out = "config " + hash + "\n";
  out += "profile steps: " + std::to_string(c.profile.step_count()) + "\n";
  out += "tau: " + format_double(c.cs.tau()) + "\n";
  out += "clusters: " + std::to_string(c.cs.size()) + "\n";
  out += "covered entries: " + std::to_string(stats.covered_entries) + "\n";
  out += "replicated entries: " + std::to_string(stats.replicated_entries) + " (max " +
         std::to_string(stats.max_replication) + ", mean " + fmt("%.4f", stats.mean_replication) +
         ")\n";
  out += "mean quality: " + (q_n ? fmt("%.6f", q_sum / static_cast<double>(q_n)) : std::string("n/a")) +
         " over " + std::to_string(q_n) + " multi-member clusters\n";
  out += "wrote " + path + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// place

std::string run_place(const Config& cfg, const std::string& hash) {
  const auto trace = parse_trace(read_file(cfg.get("trace")));
  const auto cs = parse_clusters(read_file(cfg.get("clusters")));
  const auto profile = matching_profile(cfg, trace, cs);
  const std::size_t n_disk = positive(cfg, "disks");
  const auto policy_name = cfg.get("placement");
  StartPolicy policy;
  if (policy_name == "global") {
    policy = StartPolicy::kGlobalPointer;
  } else if (policy_name == "single") {
    policy = StartPolicy::kSingleStart;
  } else {
    fail(ErrorCode::kUsage, "placement must be global or single");
  }
  auto sc = sim_config(cfg);
  sc.n_disk = n_disk;
  const auto pm = place_clusters(cs, n_disk, policy);
  const auto freqs = cluster_frequencies(cs, profile, selection(cfg));
  const auto dram = build_dram_plan(cs, pm, freqs, non_negative(cfg, "window"), cache_budget(cfg, cs),
                                    score_params(sc));

  const auto dir = ensure_dir(cfg.get("out"));
  const auto pm_path = (dir / "placement.kvplace").string();
  const auto dram_path = (dir / "dram.kvdram").string();
  write_file(pm_path, write_placement(pm, hash));
  write_file(dram_path, write_dram_plan(dram, hash));

  std::string out = "config " + hash + "\n";
  for (DeviceId d = 0; d < n_disk; ++d) {
    out += "device " + std::to_string(d) + ": " + std::to_string(pm.device_fill(d)) + " slots\n";
  }
  out += "hot clusters: " + std::to_string(dram.hot_cache.size()) + " (" +
         std::to_string(cluster_entries(cs, dram.hot_cache)) + " of " +
         std::to_string(dram.cache_budget_entries) + " budget entries)\n";
  out += "window: " + std::to_string(dram.window.size()) + " entries\n";
  out += "wrote " + pm_path + "\nwrote " + dram_path + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// simulate

struct Source {
  std::optional<double> sparsity;  // set when generated
  ActivationTrace trace;
  ActivationTrace profile;
  ClusterSet cs;
  std::shared_ptr<DistanceMatrix> offline;  // may be null
  std::vector<std::int64_t> freqs;
};

struct Task {
  std::size_t source = 0;
  std::size_t n_disk = 0;
  RetrievalMode mode = RetrievalMode::kSwarm;
};

RunResult run_task(const Config& cfg, const Source& src, const Task& task) {
  auto sc = sim_config(cfg);
  sc.n_disk = task.n_disk;
  sc.mode = task.mode;
  const auto addressing = cfg.get("addressing");
  if (addressing == "per_step") {
    sc.addressing = Addressing::kPerStep;
  } else if (addressing == "per_entry") {
    sc.addressing = Addressing::kPerEntry;
  } else {
    fail(ErrorCode::kUsage, "addressing must be per_step or per_entry");
  }

  RunOptions ro;
  ro.selection = selection(cfg);
  const auto cache = cfg.get("cache_policy");
  if (cache == "score") {
    ro.cache = CacheKind::kScore;
  } else if (cache == "lru") {
    ro.cache = CacheKind::kLru;
  } else if (cache == "none") {
    ro.cache = CacheKind::kNone;
  } else {
    fail(ErrorCode::kUsage, "cache_policy must be score, lru or none");
  }
  ro.cluster_freq = src.freqs;
  ro.maintainer.window = non_negative(cfg, "window");
  ro.maintainer.tau = unit_open(cfg, "adapt_tau");
  const auto assign = cfg.get("assign");
  if (assign == "windowed") {
    ro.maintainer.policy = AssignPolicy::kWindowed;
  } else if (assign == "min_size") {
    ro.maintainer.policy = AssignPolicy::kMinSize;
  } else if (assign == "min_diff") {
    ro.maintainer.policy = AssignPolicy::kMinDiff;
  } else {
    fail(ErrorCode::kUsage, "assign must be windowed, min_size or min_diff");
  }
  ro.start_step = non_negative(cfg, "start_step");

  // The DRAM plan always derives from the balanced layout; the no_cluster
  // baseline only uses its window.
  const auto balanced = place_clusters(src.cs, task.n_disk, StartPolicy::kGlobalPointer);
  const auto dram = build_dram_plan(src.cs, balanced, src.freqs, ro.maintainer.window,
                                    cache_budget(cfg, src.cs), score_params(sc));
  PlacementMap pm;
  switch (task.mode) {
    case RetrievalMode::kNoCluster: pm = place_sequential(src.cs.entry_count(), task.n_disk); break;
    case RetrievalMode::kNoBalance:
      pm = place_clusters(src.cs, task.n_disk, StartPolicy::kSingleStart);
      break;
    default: pm = balanced;
  }
  return run_workload(src.trace, src.cs, std::move(pm), dram, sc, ro, src.offline.get());
}

std::vector<Source> load_sources(const Config& cfg) {
  std::vector<Source> sources;
  const bool has_trace = !cfg.get("trace").empty();
  const bool has_gen = !cfg.get("entries").empty() || !cfg.get("groups").empty();
  if (has_trace && (has_gen || !cfg.get("sparsity").empty())) {
    fail(ErrorCode::kUsage, "give either --trace or generator options (entries, groups, sparsity), not both");
  }
  if (!has_trace && !cfg.get("clusters").empty()) {
    fail(ErrorCode::kUsage, "--clusters needs --trace");
  }
  const bool min_diff = cfg.get("assign") == "min_diff";

  auto finish = [&](Source& s) {
    s.freqs = cluster_frequencies(s.cs, s.profile, selection(cfg));
  };

  if (has_trace) {
    Source s;
    s.trace = parse_trace(read_file(cfg.get("trace")));
    if (!cfg.get("clusters").empty()) {
      s.cs = parse_clusters(read_file(cfg.get("clusters")));
      s.profile = matching_profile(cfg, s.trace, s.cs);
      if (min_diff) {
        s.offline = std::make_shared<DistanceMatrix>(profile_distances(s.profile, normalization(cfg)));
      }
    } else {
      auto c = cluster_trace(cfg, s.trace);
      s.profile = std::move(c.profile);
      s.cs = std::move(c.cs);
      s.offline = std::move(c.dist);
    }
    finish(s);
    sources.push_back(std::move(s));
    return sources;
  }
  if (cfg.get("entries").empty() || cfg.get("groups").empty()) {
    fail(ErrorCode::kUsage, "simulate needs --trace, or --entries and --groups to generate one");
  }
  const auto sparsities = cfg.get("sparsity").empty() ? std::vector<double>{0.1}
                                                      : parse_real_range(cfg.get("sparsity"));
  for (double sp : sparsities) {
    Source s;
    s.sparsity = sp;
    s.trace = generate(planted_spec(cfg, sp)).trace;
    auto c = cluster_trace(cfg, s.trace);
    s.profile = std::move(c.profile);
    s.cs = std::move(c.cs);
    s.offline = std::move(c.dist);
    finish(s);
    sources.push_back(std::move(s));
  }
  return sources;
}

std::string point_label(const Source& src, std::size_t n_disk) {
  std::string label = "disks-" + std::to_string(n_disk);
  if (src.sparsity) label = "sparsity-" + format_double(*src.sparsity) + "_" + label;
  return label;
}

Json summary_json(const Summary& s) {
  Json j;
  j["steps"] = s.steps;
  j["total_io_time_us"] = s.total_io_time_us;
  j["mean_io_time_us"] = s.mean_io_time_us;
  j["p50_io_time_us"] = s.p50_io_time_us;
  j["p99_io_time_us"] = s.p99_io_time_us;
  j["max_io_time_us"] = s.max_io_time_us;
  j["total_volume_bytes"] = s.total_volume;
  j["effective_bandwidth_bytes_per_s"] = s.effective_bandwidth;
  j["mean_step_bandwidth_bytes_per_s"] = s.mean_step_bandwidth;
  j["cache_hits"] = s.cache_hits;
  j["cluster_accesses"] = s.cluster_accesses;
  j["cache_hit_rate"] = s.cache_hit_rate;
  j["lower_bound_us"] = s.lower_bound_us;
  j["assigned_entries"] = s.assigned_entries;
  return j;
}

const Json* find_mode(const Json& runs, const std::string& mode) {
  for (const auto& r : runs) {
    if (r["mode"] == mode) return &r;
  }
  return nullptr;
}

std::string ratio_cell(double num, double den) {
  return den > 0.0 ? format_double(num / den) : std::string();
}

// Comparison of every mode against swarm within each (sparsity, disks) point.
std::string comparison_csv(const Json& summary, const std::string& hash) {
  std::string out = provenance_comment(hash);
  out += "sparsity,disks,mode,total_io_time_us,p99_io_time_us,total_volume_bytes,"
         "effective_bw_bytes_per_s,cache_hit_rate,lower_bound_us,io_time_vs_swarm,"
         "volume_vs_swarm,bandwidth_vs_swarm\n";
  for (const auto& p : summary["points"]) {
    const Json* swarm = find_mode(p["runs"], "swarm");
    for (const auto& r : p["runs"]) {
      const auto& s = r["summary"];
      out += (p["sparsity"].is_null() ? std::string() : format_double(p["sparsity"].get<double>())) + ",";
      out += std::to_string(p["disks"].get<std::size_t>()) + "," + r["mode"].get<std::string>() + ",";
      out += format_double(s["total_io_time_us"].get<double>()) + ",";
      out += format_double(s["p99_io_time_us"].get<double>()) + ",";
      out += std::to_string(s["total_volume_bytes"].get<std::uint64_t>()) + ",";
      out += format_double(s["effective_bandwidth_bytes_per_s"].get<double>()) + ",";
      out += format_double(s["cache_hit_rate"].get<double>()) + ",";
      out += format_double(s["lower_bound_us"].get<double>()) + ",";
      if (swarm) {
        const auto& w = (*swarm)["summary"];
        out += ratio_cell(s["total_io_time_us"].get<double>(), w["total_io_time_us"].get<double>()) + ",";
        out += ratio_cell(static_cast<double>(s["total_volume_bytes"].get<std::uint64_t>()),
                          static_cast<double>(w["total_volume_bytes"].get<std::uint64_t>())) +
               ",";
        out += ratio_cell(s["effective_bandwidth_bytes_per_s"].get<double>(),
                          w["effective_bandwidth_bytes_per_s"].get<double>());
      } else {
        out += ",,";
      }
      out += "\n";
    }
  }
  return out;
}

std::vector<std::string> modes_of(const Json& summary) {
  std::vector<std::string> modes;
  for (const auto& m : summary["modes"]) modes.push_back(m.get<std::string>());
  return modes;
}

double metric(const Json& point, const std::string& mode, const char* key) {
  const Json* r = find_mode(point["runs"], mode);
  return r ? (*r)["summary"][key].get<double>() : 0.0;
}

// Effective bandwidth against device count, one column per mode.
std::string devices_csv(const Json& summary, const std::string& hash) {
  const auto modes = modes_of(summary);
  std::string out = provenance_comment(hash) + "sparsity,disks";
  for (const auto& m : modes) out += "," + m + "_bw_bytes_per_s";
  out += "\n";
  for (const auto& p : summary["points"]) {
    out += (p["sparsity"].is_null() ? std::string() : format_double(p["sparsity"].get<double>())) + ",";
    out += std::to_string(p["disks"].get<std::size_t>());
    for (const auto& m : modes) out += "," + format_double(metric(p, m, "effective_bandwidth_bytes_per_s"));
    out += "\n";
  }
  return out;
}

// Total I/O time against sparsity, one column per mode.
std::string sparsity_csv(const Json& summary, const std::string& hash) {
  const auto modes = modes_of(summary);
  std::string out = provenance_comment(hash) + "disks,sparsity";
  for (const auto& m : modes) out += "," + m + "_io_time_us";
  out += "\n";
  std::vector<const Json*> points;
  for (const auto& p : summary["points"]) points.push_back(&p);
  std::stable_sort(points.begin(), points.end(), [](const Json* a, const Json* b) {
    return (*a)["disks"].get<std::size_t>() < (*b)["disks"].get<std::size_t>();
  });
  for (const Json* p : points) {
    out += std::to_string((*p)["disks"].get<std::size_t>()) + "," +
           format_double((*p)["sparsity"].get<double>());
    for (const auto& m : modes) out += "," + format_double(metric(*p, m, "total_io_time_us"));
    out += "\n";
  }
  return out;
}

std::size_t distinct(const Json& summary, const char* key) {
  std::vector<std::string> seen;
  for (const auto& p : summary["points"]) {
    const auto v = p[key].dump();
    if (std::find(seen.begin(), seen.end(), v) == seen.end()) seen.push_back(v);
  }
  return seen.size();
}

std::string table_text(const Json& summary) {
  std::string out;
  for (const auto& p : summary["points"]) {
    out += "\n";
    if (!p["sparsity"].is_null()) out += "sparsity " + format_double(p["sparsity"].get<double>()) + ", ";
    out += std::to_string(p["disks"].get<std::size_t>()) + " disks, " +
           std::to_string(p["clusters"].get<std::size_t>()) + " clusters\n";
    char line[200];
    std::snprintf(line, sizeof line, "  %-11s %14s %14s %12s %9s %9s\n", "mode", "io_time_ms",
                  "volume_MB", "bw_GB/s", "time/sw", "hit_rate");
    out += line;
    const Json* swarm = find_mode(p["runs"], "swarm");
    for (const auto& r : p["runs"]) {
      const auto& s = r["summary"];
      const double t = s["total_io_time_us"].get<double>();
      std::string rel = "-";
      if (swarm && (*swarm)["summary"]["total_io_time_us"].get<double>() > 0) {
        rel = fmt("%.3f", t / (*swarm)["summary"]["total_io_time_us"].get<double>());
      }
      std::snprintf(line, sizeof line, "  %-11s %14.3f %14.3f %12.3f %9s %9.3f\n",
                    r["mode"].get<std::string>().c_str(), t / 1e3,
                    static_cast<double>(s["total_volume_bytes"].get<std::uint64_t>()) / 1e6,
                    s["effective_bandwidth_bytes_per_s"].get<double>() / 1e9, rel.c_str(),
                    s["cache_hit_rate"].get<double>());
      out += line;
    }
  }
  return out;
}

std::vector<std::string> write_plots(const Json& summary, const fs::path& dir) {
  const std::string hash = summary["config_hash"].get<std::string>();
  const std::string comment = std::string("kvswarm ") + kVersion + " config=" + hash;
  const auto modes = modes_of(summary);
  std::vector<std::string> written;

  const auto& first = summary["points"].front();
  std::vector<std::string> labels;
  std::vector<double> times;
  for (const auto& r : first["runs"]) {
    labels.push_back(r["mode"].get<std::string>());
    times.push_back(r["summary"]["total_io_time_us"].get<double>() / 1e3);
  }
  const auto cmp = (dir / "comparison.svg").string();
  write_file(cmp, svg::bar_chart("Total I/O time by retrieval mode", "I/O time (ms)", labels, times, comment));
  written.push_back(cmp);

  auto sweep = [&](const char* key, const char* fixed_key, const char* metric_key, double scale,
                   const std::string& title, const std::string& x_label, const std::string& y_label,
                   const std::string& file) {
    std::vector<double> x;
    std::vector<svg::Series> series;
    for (const auto& m : modes) series.push_back({m, {}});
    for (const auto& p : summary["points"]) {
      if (p[fixed_key] != first[fixed_key]) continue;
      x.push_back(p[key].get<double>());
      for (std::size_t i = 0; i < modes.size(); ++i) {
        series[i].y.push_back(metric(p, modes[i], metric_key) / scale);
      }
    }
    const auto path = (dir / file).string();
    write_file(path, svg::line_chart(title, x_label, y_label, x, series, comment));
    written.push_back(path);
  };
  if (distinct(summary, "disks") > 1) {
    sweep("disks", "sparsity", "effective_bandwidth_bytes_per_s", 1e9, "Effective bandwidth by device count",
          "devices", "bandwidth (GB/s)", "devices.svg");
  }
  if (distinct(summary, "sparsity") > 1) {
    sweep("sparsity", "disks", "total_io_time_us", 1e3, "Total I/O time by sparsity", "sparsity",
          "I/O time (ms)", "sparsity.svg");
  }
  return written;
}

std::string run_simulate(const Config& cfg, const std::string& hash) {
  std::vector<RetrievalMode> modes;
  for (const auto& name : split(cfg.get("modes"), ',')) {
    const auto m = parse_mode(name);
    if (std::find(modes.begin(), modes.end(), m) != modes.end()) {
      fail(ErrorCode::kUsage, "mode '" + name + "' listed twice");
    }
    modes.push_back(m);
  }
  std::vector<std::size_t> disks;
  for (auto d : parse_int_range(cfg.get("disks"))) {
    if (d < 1) fail(ErrorCode::kUsage, "disks must be at least 1");
    disks.push_back(static_cast<std::size_t>(d));
  }
  const std::size_t jobs = positive(cfg, "jobs");
  sim_config(cfg);  // validate presets before the expensive part

  const auto sources = load_sources(cfg);
  std::vector<Task> tasks;
  for (std::size_t s = 0; s < sources.size(); ++s) {
    for (auto d : disks) {
      for (auto m : modes) tasks.push_back({s, d, m});
    }
  }

  // Workers pull tasks in order; results land in task order regardless of
  // completion order.
  std::vector<RunResult> results(tasks.size());
  std::vector<std::exception_ptr> errors(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      try {
        results[i] = run_task(cfg, sources[tasks[i].source], tasks[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  {
    std::vector<std::thread> pool;
    for (std::size_t j = 1; j < std::min(jobs, tasks.size()); ++j) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  const auto run_dir = ensure_dir((fs::path(cfg.get("out")) / ("run-" + hash)).string());
  const bool single_point = sources.size() * disks.size() == 1;

  Json summary;
  summary["version"] = kVersion;
  summary["config_hash"] = hash;
  summary["command"] = "simulate";
  Json config = Json::object();
  for (const auto& [k, v] : cfg.effective()) {
    if (!excluded_from_hash(k)) config[k] = v;
  }
  summary["config"] = config;
  Json mode_names = Json::array();
  for (auto m : modes) mode_names.push_back(std::string(to_string(m)));
  summary["modes"] = mode_names;
  Json points = Json::array();
  for (std::size_t i = 0; i < tasks.size(); i += modes.size()) {
    const auto& src = sources[tasks[i].source];
    Json p;
    p["sparsity"] = src.sparsity ? Json(*src.sparsity) : Json(nullptr);
    p["disks"] = tasks[i].n_disk;
    p["tau"] = src.cs.tau();
    p["clusters"] = src.cs.size();
    p["entries"] = src.trace.entry_count();
    p["steps"] = src.trace.step_count();
    const std::string label = point_label(src, tasks[i].n_disk);
    fs::path point_dir = run_dir;
    if (!single_point) point_dir = ensure_dir((run_dir / label).string());
    Json runs = Json::array();
    for (std::size_t k = 0; k < modes.size(); ++k) {
      const auto& r = results[i + k];
      const std::string mode(to_string(tasks[i + k].mode));
      const auto csv = point_dir / (mode + ".csv");
      write_file(csv.string(), provenance_comment(hash) + metrics_csv(r.steps));
      Json run;
      run["mode"] = mode;
      run["csv"] = fs::relative(csv, run_dir).generic_string();
      run["final_clusters"] = r.final_clusters;
      run["summary"] = summary_json(r.summary);
      runs.push_back(std::move(run));
    }
    p["runs"] = std::move(runs);
    points.push_back(std::move(p));
  }
  summary["points"] = std::move(points);

  write_file((run_dir / "summary.json").string(), summary.dump(2) + "\n");
  write_file((run_dir / "comparison.csv").string(), comparison_csv(summary, hash));
  if (disks.size() > 1) write_file((run_dir / "devices.csv").string(), devices_csv(summary, hash));
  if (sources.size() > 1) write_file((run_dir / "sparsity.csv").string(), sparsity_csv(summary, hash));

  std::string out = "config " + hash + "\nrun directory: " + run_dir.string() + "\n";
  out += table_text(summary);
  if (cfg.get_bool("emit_plots")) {
    out += "\n";
    for (const auto& path : write_plots(summary, run_dir)) out += "wrote " + path + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// report

std::string run_report(const Config& cfg, const std::string& hash) {
  const fs::path dir(cfg.get("run"));
  Json summary;
  try {
    summary = Json::parse(read_file((dir / "summary.json").string()));
  } catch (const Json::exception& e) {
    fail(ErrorCode::kParse, "summary.json: " + std::string(e.what()));
  }
  if (!summary.contains("points") || !summary["points"].is_array() || summary["points"].empty()) {
    fail(ErrorCode::kParse, "summary.json has no run points");
  }
  std::string out = "config " + hash + "\nrun " + summary.value("config_hash", std::string("?")) +
                    " (kvswarm " + summary.value("version", std::string("?")) + ")\n";
  try {
    out += table_text(summary);
    if (cfg.get_bool("emit_plots")) {
      out += "\n";
      for (const auto& path : write_plots(summary, dir)) out += "wrote " + path + "\n";
    }
  } catch (const Json::exception& e) {
    fail(ErrorCode::kParse, "summary.json: " + std::string(e.what()));
  }
  return out;
}

}  // namespace

std::string execute(const Config& cfg) {
  cfg.check_required();
  const std::string hash = cfg.hash();
  const auto& cmd = cfg.command();
  if (cmd == "gen") return run_gen(cfg, hash);
  if (cmd == "cluster") return run_cluster(cfg, hash);
  if (cmd == "place") return run_place(cfg, hash);
  if (cmd == "simulate") return run_simulate(cfg, hash);
  return run_report(cfg, hash);
}

}  // namespace kvswarm
