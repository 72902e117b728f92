// Copyright 2026 The kvswarm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace kvswarm {

struct OptionSpec {
  std::string name;
  std::string default_value;  // empty when unset by default
  std::string help;
  bool required = false;
};

/// "gen", "cluster", "place", "simulate", "report".
const std::vector<std::string>& command_names();

/// Options accepted by `command`. Throws Error(kUsage) for unknown commands.
const std::vector<OptionSpec>& command_options(std::string_view command);

/// Key/value settings for one command. Keys use underscores.
class Config {
 public:
  explicit Config(std::string command);

  const std::string& command() const noexcept { return command_; }

  /// Throws Error(kUsage) for keys the command does not accept.
  void set(const std::string& key, const std::string& value);
  bool is_set(const std::string& key) const { return values_.count(key) != 0; }

  /// `key = value` lines; '#' starts a comment. Later lines win.
  void load_text(std::string_view text);

  /// Explicit value, else the default (possibly empty).
  std::string get(const std::string& key) const;
  std::int64_t get_int(const std::string& key) const;
  double get_real(const std::string& key) const;
  bool get_bool(const std::string& key) const;

  /// Throws Error(kUsage) naming the first required key without a value.
  void check_required() const;

  /// Effective values of every option, by key.
  std::map<std::string, std::string> effective() const;

  /// 16 hex digits identifying the command, its effective options (minus
  /// output location and parallelism) and the content of input files.
  std::string hash() const;

 private:
  const OptionSpec& spec(const std::string& key) const;

  std::string command_;
  std::map<std::string, std::string> values_;
};

/// Runs the configured command, writing its artifacts; returns the text it
/// would print on stdout.
std::string execute(const Config& cfg);

/// "a..b" (integer step 1), "a..b:step", or a comma list.
std::vector<std::int64_t> parse_int_range(std::string_view text);
/// "a..b" (step = a), "a..b:step", or a comma list.
std::vector<double> parse_real_range(std::string_view text);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view data, std::uint64_t seed = 14695981039346656037ull);

}  // namespace kvswarm
