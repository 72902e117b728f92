// Copyright 2026 The kvswarm Authors
// SPDX-License-Identifier: Apache-2.0

#include "kvswarm/kvswarm.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <new>
#include <string>

#include "kvswarm/error.hpp"
#include "kvswarm/pipeline.hpp"
#include "kvswarm/types.hpp"

struct kvs_config {
  kvswarm::Config config;
};

namespace {

thread_local std::string g_last_error;

kvs_status record(kvs_status status, const char* message) {
  g_last_error = message;
  return status;
}

// Runs `fn`, translating exceptions into status codes.
template <typename Fn>
kvs_status guarded(Fn&& fn) {
  try {
    fn();
    return KVS_OK;
  } catch (const kvswarm::Error& e) {
    return record(static_cast<kvs_status>(static_cast<int>(e.code())), e.what());
  } catch (const std::bad_alloc&) {
    return record(KVS_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return record(KVS_INTERNAL, e.what());
  } catch (...) {
    return record(KVS_INTERNAL, "unknown error");
  }
}

char* duplicate(const std::string& s) {
  auto* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

bool null_argument(const void* p, const char* what) {
  if (p) return false;
  record(KVS_INVALID_ARGUMENT, what);
  return true;
}

}  // namespace

extern "C" {

const char* kvs_version(void) { return kvswarm::kVersion; }

const char* kvs_last_error(void) { return g_last_error.c_str(); }

size_t kvs_command_count(void) { return kvswarm::command_names().size(); }

const char* kvs_command_name(size_t i) {
  const auto& names = kvswarm::command_names();
  return i < names.size() ? names[i].c_str() : nullptr;
}

size_t kvs_option_count(const char* command) {
  if (!command) return 0;
  try {
    return kvswarm::command_options(command).size();
  } catch (...) {
    return 0;
  }
}

kvs_status kvs_option_info(const char* command, size_t i, const char** name,
                           const char** default_value, const char** help, int* required) {
  if (null_argument(command, "command is NULL")) return KVS_INVALID_ARGUMENT;
  return guarded([&] {
    const auto& opts = kvswarm::command_options(command);
    if (i >= opts.size()) kvswarm::fail(kvswarm::ErrorCode::kInvalidArgument, "option index out of range");
    if (name) *name = opts[i].name.c_str();
    if (default_value) *default_value = opts[i].default_value.c_str();
    if (help) *help = opts[i].help.c_str();
    if (required) *required = opts[i].required ? 1 : 0;
  });
}

kvs_status kvs_config_create(const char* command, kvs_config** out) {
  if (null_argument(command, "command is NULL") || null_argument(out, "out is NULL")) {
    return KVS_INVALID_ARGUMENT;
  }
  *out = nullptr;
  return guarded([&] { *out = new kvs_config{kvswarm::Config(command)}; });
}

void kvs_config_destroy(kvs_config* cfg) { delete cfg; }

kvs_status kvs_config_set(kvs_config* cfg, const char* key, const char* value) {
  if (null_argument(cfg, "config is NULL") || null_argument(key, "key is NULL") ||
      null_argument(value, "value is NULL")) {
    return KVS_INVALID_ARGUMENT;
  }
  return guarded([&] { cfg->config.set(key, value); });
}

kvs_status kvs_config_load(kvs_config* cfg, const char* text) {
  if (null_argument(cfg, "config is NULL") || null_argument(text, "text is NULL")) {
    return KVS_INVALID_ARGUMENT;
  }
  return guarded([&] { cfg->config.load_text(text); });
}

kvs_status kvs_config_get(const kvs_config* cfg, const char* key, char** value) {
  if (null_argument(cfg, "config is NULL") || null_argument(key, "key is NULL") ||
      null_argument(value, "value is NULL")) {
    return KVS_INVALID_ARGUMENT;
  }
  return guarded([&] { *value = duplicate(cfg->config.get(key)); });
}

kvs_status kvs_config_hash(const kvs_config* cfg, char** hash) {
  if (null_argument(cfg, "config is NULL") || null_argument(hash, "hash is NULL")) {
    return KVS_INVALID_ARGUMENT;
  }
  return guarded([&] { *hash = duplicate(cfg->config.hash()); });
}

kvs_status kvs_execute(const kvs_config* cfg, char** output) {
  if (null_argument(cfg, "config is NULL")) return KVS_INVALID_ARGUMENT;
  return guarded([&] {
    const std::string text = kvswarm::execute(cfg->config);
    if (output) *output = duplicate(text);
  });
}

void kvs_free(void* p) { std::free(p); }

}  // extern "C"
