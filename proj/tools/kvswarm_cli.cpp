// Copyright 2026 The kvswarm Authors
// SPDX-License-Identifier: Apache-2.0

// Command-line front end. Options come from the pipeline schema; each key is
// exposed as --key-name. Precedence: flags, then KVSWARM_SEED, then --config.

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "kvswarm/error.hpp"
#include "kvswarm/formats.hpp"
#include "kvswarm/pipeline.hpp"
#include "kvswarm/types.hpp"

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

std::string flag_name(std::string key) {
  for (char& c : key) {
    if (c == '_') c = '-';
  }
  return "--" + key;
}

bool is_bool_option(const kvswarm::OptionSpec& o) {
  return o.default_value == "false" || o.default_value == "true";
}

struct Subcommand {
  CLI::App* app = nullptr;
  std::string config_file;
  std::map<std::string, std::string> values;
  std::map<std::string, bool> flags;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Co-activation-aware KV cache offloading: trace generation, clustering, "
               "placement and multi-device retrieval simulation"};
  app.set_version_flag("--version", std::string("kvswarm ") + kvswarm::kVersion);
  app.require_subcommand(1);

  std::map<std::string, Subcommand> subs;
  for (const auto& name : kvswarm::command_names()) {
    auto& sub = subs[name];
    static const std::map<std::string, std::string> descriptions = {
        {"gen", "Generate a planted activation trace and its ground-truth groups"},
        {"cluster", "Cluster a trace's profiling steps"},
        {"place", "Lay clusters out over devices and plan DRAM residency"},
        {"simulate", "Run retrieval modes over a trace and compare them"},
        {"report", "Summarize a simulate run directory"},
    };
    sub.app = app.add_subcommand(name, descriptions.at(name));
    sub.app->add_option("--config", sub.config_file, "File of 'key = value' lines")
        ->check(CLI::ExistingFile);
    for (const auto& o : kvswarm::command_options(name)) {
      std::string help = o.help;
      if (!o.default_value.empty()) help += " [default: " + o.default_value + "]";
      if (o.required) help += " (required)";
      if (is_bool_option(o)) {
        sub.app->add_flag(flag_name(o.name), sub.flags[o.name], help);
      } else {
        sub.app->add_option(flag_name(o.name), sub.values[o.name], help);
      }
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  for (auto& [name, sub] : subs) {
    if (!sub.app->parsed()) continue;
    try {
      kvswarm::Config cfg(name);
      if (!sub.config_file.empty()) cfg.load_text(kvswarm::read_file(sub.config_file));
      if (const char* env = std::getenv("KVSWARM_SEED"); env && *env) {
        bool has_seed = false;
        for (const auto& o : kvswarm::command_options(name)) has_seed |= o.name == "seed";
        if (has_seed) cfg.set("seed", env);
      }
      for (const auto& o : kvswarm::command_options(name)) {
        const auto* opt = sub.app->get_option(flag_name(o.name));
        if (opt->count() == 0) continue;
        cfg.set(o.name, is_bool_option(o) ? (sub.flags[o.name] ? "true" : "false") : sub.values[o.name]);
      }
      std::cout << kvswarm::execute(cfg);
      return 0;
    } catch (const kvswarm::Error& e) {
      std::cerr << "kvswarm " << name << ": " << e.what() << "\n";
      if (e.code() == kvswarm::ErrorCode::kUsage) {
        std::cerr << "run 'kvswarm " << name << " --help' for options\n";
        return kExitUsage;
      }
      return kExitRuntime;
    } catch (const std::exception& e) {
      std::cerr << "kvswarm " << name << ": " << e.what() << "\n";
      return kExitRuntime;
    }
  }
  return kExitUsage;
}
