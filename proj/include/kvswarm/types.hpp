// Copyright 2026 The kvswarm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>

namespace kvswarm {

// Token position within one layer's KV cache.
using EntryId = std::uint32_t;
using ClusterId = std::uint32_t;
using DeviceId = std::uint32_t;

inline constexpr const char* kVersion = "0.1.0";

}  // namespace kvswarm
