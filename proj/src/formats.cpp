// Copyright 2026 The kvswarm Authors
// SPDX-License-Identifier: Apache-2.0

#include "kvswarm/formats.hpp"

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "kvswarm/error.hpp"

namespace kvswarm {

namespace {

std::string provenance(std::string_view hash) {
  return std::string("# kvswarm ") + kVersion + " config=" + std::string(hash) + "\n";
}

std::string join_ids(const std::vector<EntryId>& ids) {
  if (ids.empty()) return "-";
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(ids[i]);
  }
  return out;
}

struct Line {
  std::size_t number;
  std::vector<std::string_view> tokens;
};

// Splits into non-comment, non-blank lines of whitespace-separated tokens.
std::vector<Line> tokenize(std::string_view text) {
  std::vector<Line> lines;
  std::size_t number = 0;
  while (!text.empty()) {
    const std::size_t nl = text.find('\n');
    std::string_view raw = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++number;
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
    Line line{number, {}};
    std::size_t i = 0;
    while (i < raw.size()) {
      while (i < raw.size() && (raw[i] == ' ' || raw[i] == '\t')) ++i;
      const std::size_t start = i;
      while (i < raw.size() && raw[i] != ' ' && raw[i] != '\t') ++i;
      if (i > start) line.tokens.push_back(raw.substr(start, i - start));
    }
    if (line.tokens.empty() || line.tokens.front().front() == '#') continue;
    lines.push_back(std::move(line));
  }
  return lines;
}

[[noreturn]] void parse_error(std::size_t line, const std::string& msg) {
  fail(ErrorCode::kParse, "line " + std::to_string(line) + ": " + msg);
}

std::uint64_t parse_uint(std::string_view s, std::size_t line) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
    parse_error(line, "expected a non-negative integer, got '" + std::string(s) + "'");
  }
  return v;
}

double parse_real(std::string_view s, std::size_t line) {
  const std::string copy(s);
  char* end = nullptr;
  const double v = std::strtod(copy.c_str(), &end);
  if (copy.empty() || end != copy.c_str() + copy.size()) {
    parse_error(line, "expected a number, got '" + copy + "'");
  }
  return v;
}

std::vector<EntryId> parse_ids(std::string_view s, std::size_t line) {
  std::vector<EntryId> ids;
  if (s == "-") return ids;
  while (true) {
    const std::size_t comma = s.find(',');
    const auto v = parse_uint(s.substr(0, comma), line);
    if (v > UINT32_MAX) parse_error(line, "id out of range");
    ids.push_back(static_cast<EntryId>(v));
    if (comma == std::string_view::npos) break;
    s = s.substr(comma + 1);
  }
  return ids;
}

std::string_view field(const Line& l, std::size_t idx, std::string_view key) {
  if (idx >= l.tokens.size()) parse_error(l.number, "missing field '" + std::string(key) + "'");
  const auto tok = l.tokens[idx];
  if (tok.size() <= key.size() || tok.substr(0, key.size()) != key || tok[key.size()] != '=') {
    parse_error(l.number, "expected '" + std::string(key) + "=...', got '" + std::string(tok) + "'");
  }
  return tok.substr(key.size() + 1);
}

void expect_header(const std::vector<Line>& lines, std::string_view magic, std::size_t n_fields) {
  if (lines.empty()) fail(ErrorCode::kParse, "empty file, expected '" + std::string(magic) + "' header");
  const auto& h = lines.front();
  if (h.tokens[0] != magic) {
    parse_error(h.number, "expected '" + std::string(magic) + "' header, got '" +
                              std::string(h.tokens[0]) + "'");
  }
  if (h.tokens.size() != n_fields) parse_error(h.number, "malformed header");
  if (h.tokens[1] != "1") parse_error(h.number, "unsupported format version " + std::string(h.tokens[1]));
}

void expect_tokens(const Line& l, std::string_view kind, std::size_t n) {
  if (l.tokens[0] != kind) {
    parse_error(l.number, "expected '" + std::string(kind) + "' record, got '" +
                              std::string(l.tokens[0]) + "'");
  }
  if (l.tokens.size() != n) parse_error(l.number, "unexpected number of fields");
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  for (int precision = 6; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

std::string write_trace(const ActivationTrace& trace, std::string_view config_hash) {
  std::string out = "kvtrace 1 " + std::to_string(trace.initial_entries()) + "\n";
  out += provenance(config_hash);
  for (std::size_t t = 0; t < trace.step_count(); ++t) {
    const auto& s = trace.steps()[t];
    out += "step " + std::to_string(t) + " new=" + join_ids(s.new_entries) +
           " act=" + join_ids(s.activated) + "\n";
  }
  return out;
}

ActivationTrace parse_trace(std::string_view text) {
  const auto lines = tokenize(text);
  expect_header(lines, "kvtrace", 3);
  const auto initial = parse_uint(lines[0].tokens[2], lines[0].number);
  std::vector<ActivationStep> steps;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto& l = lines[i];
    expect_tokens(l, "step", 4);
    if (parse_uint(l.tokens[1], l.number) != steps.size()) {
      parse_error(l.number, "step index out of sequence");
    }
    ActivationStep s;
    s.new_entries = parse_ids(field(l, 2, "new"), l.number);
    s.activated = parse_ids(field(l, 3, "act"), l.number);
    steps.push_back(std::move(s));
  }
  try {
    return ActivationTrace(initial, std::move(steps));
  } catch (const Error& e) {
    fail(ErrorCode::kParse, e.what());
  }
}

std::string write_groups(const std::vector<std::vector<EntryId>>& groups,
                         std::string_view config_hash) {
  std::string out = "kvgroups 1 " + std::to_string(groups.size()) + "\n";
  out += provenance(config_hash);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    out += "group " + std::to_string(g) + " members=" + join_ids(groups[g]) + "\n";
  }
  return out;
}

std::vector<std::vector<EntryId>> parse_groups(std::string_view text) {
  const auto lines = tokenize(text);
  expect_header(lines, "kvgroups", 3);
  const auto n = parse_uint(lines[0].tokens[2], lines[0].number);
  std::vector<std::vector<EntryId>> groups;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto& l = lines[i];
    expect_tokens(l, "group", 3);
    if (parse_uint(l.tokens[1], l.number) != groups.size()) {
      parse_error(l.number, "group id out of sequence");
    }
    groups.push_back(parse_ids(field(l, 2, "members"), l.number));
  }
  if (groups.size() != n) fail(ErrorCode::kParse, "group count does not match header");
  return groups;
}

std::string write_clusters(const ClusterSet& cs, std::string_view config_hash) {
  std::string out = "kvclust 1 " + format_double(cs.tau()) + " " + std::to_string(cs.entry_count()) +
                    " " + std::to_string(cs.size()) + "\n";
  out += provenance(config_hash);
  for (const auto& c : cs.clusters()) {
    out += "cluster " + std::to_string(c.id) + " medoid=" + std::to_string(c.medoid) +
           " members=" + join_ids(c.members) + "\n";
  }
  return out;
}

ClusterSet parse_clusters(std::string_view text) {
  const auto lines = tokenize(text);
  expect_header(lines, "kvclust", 5);
  const auto& h = lines[0];
  const double tau = parse_real(h.tokens[2], h.number);
  const auto n_entries = parse_uint(h.tokens[3], h.number);
  const auto n_clusters = parse_uint(h.tokens[4], h.number);
  ClusterSet cs(tau, n_entries);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto& l = lines[i];
    expect_tokens(l, "cluster", 4);
    if (parse_uint(l.tokens[1], l.number) != cs.size()) {
      parse_error(l.number, "cluster id out of sequence");
    }
    const auto medoid = parse_uint(field(l, 2, "medoid"), l.number);
    const auto members = parse_ids(field(l, 3, "members"), l.number);
    if (members.empty() || members.front() != medoid) {
      parse_error(l.number, "members must start with the medoid");
    }
    try {
      const ClusterId id = cs.add_cluster(members.front());
      for (std::size_t k = 1; k < members.size(); ++k) cs.add_member(id, members[k], 0.0);
    } catch (const Error& e) {
      parse_error(l.number, e.what());
    }
  }
  if (cs.size() != n_clusters) fail(ErrorCode::kParse, "cluster count does not match header");
  return cs;
}

std::string write_placement(const PlacementMap& pm, std::string_view config_hash) {
  std::string out = "kvplace 1 " + std::to_string(pm.n_disk()) + "\n";
  out += provenance(config_hash);
  for (std::size_t e = 0; e < pm.entry_count(); ++e) {
    const auto slots = pm.locations(static_cast<EntryId>(e));
    if (slots.empty()) continue;
    out += "entry " + std::to_string(e) + " replicas=";
    for (std::size_t i = 0; i < slots.size(); ++i) {
      if (i) out += ',';
      out += std::to_string(slots[i].device) + ":" + std::to_string(slots[i].slot);
    }
    out += '\n';
  }
  return out;
}

std::string write_dram_plan(const DramPlan& plan, std::string_view config_hash) {
  std::string out = "kvdram 1 " + std::to_string(plan.window_capacity) + " " +
                    std::to_string(plan.cache_budget_entries) + "\n";
  out += provenance(config_hash);
  for (std::size_t c = 0; c < plan.medoid_index.size(); ++c) {
    out += "medoid " + std::to_string(c) + " entry=" + std::to_string(plan.medoid_index[c].medoid) +
           " start=" + std::to_string(plan.medoid_index[c].start) + "\n";
  }
  out += "window entries=" + join_ids({plan.window.begin(), plan.window.end()}) + "\n";
  out += "hot clusters=" + join_ids(plan.hot_cache) + "\n";
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot open '" + path + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) fail(ErrorCode::kIo, "write to '" + path + "' failed");
}

}  // namespace kvswarm
