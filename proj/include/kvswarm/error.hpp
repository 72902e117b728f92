// Copyright 2026 The kvswarm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace kvswarm {

enum class ErrorCode {
  kInvalidArgument = 1,
  kUsage,            // bad configuration key or flag value
  kParse,            // malformed artifact file
  kIo,
  kZeroDenominator,  // co-activation matrix has no pairs
  kNotReady,         // local window not yet full
  kInconsistent,     // artifacts disagree on dimensions or contents
  kInternal,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace kvswarm

#define KVSWARM_CHECK(cond, code, msg)                 \
  do {                                                 \
    if (!(cond)) ::kvswarm::fail((code), (msg));       \
  } while (0)
