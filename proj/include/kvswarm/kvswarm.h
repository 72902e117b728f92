/* Copyright 2026 The kvswarm Authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * C interface to the kvswarm pipeline. Every function returning kvs_status
 * records a message retrievable with kvs_last_error() on failure. Strings
 * returned through out-parameters are allocated by the library and must be
 * released with kvs_free().
 */

#ifndef KVSWARM_KVSWARM_H_
#define KVSWARM_KVSWARM_H_

#include <stddef.h>

#if defined(_WIN32)
#define KVS_API __declspec(dllexport)
#else
#define KVS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum kvs_status {
  KVS_OK = 0,
  KVS_INVALID_ARGUMENT = 1,
  KVS_USAGE = 2,
  KVS_PARSE = 3,
  KVS_IO = 4,
  KVS_ZERO_DENOMINATOR = 5,
  KVS_NOT_READY = 6,
  KVS_INCONSISTENT = 7,
  KVS_INTERNAL = 8
} kvs_status;

typedef struct kvs_config kvs_config;

/* Library version, e.g. "0.1.0". Static storage. */
KVS_API const char* kvs_version(void);

/* Message of the last failure on the calling thread; "" when none. Valid
 * until the next failing call on the same thread. */
KVS_API const char* kvs_last_error(void);

/* Number of commands and the name of command i (static storage, NULL when
 * out of range). */
KVS_API size_t kvs_command_count(void);
KVS_API const char* kvs_command_name(size_t i);

/* Number of options of `command`, or 0 for unknown commands. */
KVS_API size_t kvs_option_count(const char* command);
/* Name, default and help text of option i. Pointers stay valid for the
 * lifetime of the process. */
KVS_API kvs_status kvs_option_info(const char* command, size_t i, const char** name,
                                   const char** default_value, const char** help, int* required);

KVS_API kvs_status kvs_config_create(const char* command, kvs_config** out);
KVS_API void kvs_config_destroy(kvs_config* cfg);
KVS_API kvs_status kvs_config_set(kvs_config* cfg, const char* key, const char* value);
/* `key = value` lines; '#' starts a comment. */
KVS_API kvs_status kvs_config_load(kvs_config* cfg, const char* text);
/* Effective value of `key`; release with kvs_free(). */
KVS_API kvs_status kvs_config_get(const kvs_config* cfg, const char* key, char** value);
/* 16 hex digits; release with kvs_free(). */
KVS_API kvs_status kvs_config_hash(const kvs_config* cfg, char** hash);

/* Runs the command. `output` (may be NULL) receives the report text. */
KVS_API kvs_status kvs_execute(const kvs_config* cfg, char** output);

KVS_API void kvs_free(void* p);

#ifdef __cplusplus
}
#endif

#endif /* KVSWARM_KVSWARM_H_ */
