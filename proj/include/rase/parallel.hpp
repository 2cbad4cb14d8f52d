// Copyright 2026 The rase-echo Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>

namespace rase {

/// Worker count: hardware concurrency, capped by the RASE_THREADS
/// environment variable when set.
unsigned thread_count();

/// Overrides thread_count() for the calling process (0 restores the default).
void set_thread_count_override(unsigned n);

/// Runs body(i) for i in [0, n). Work items are handed out dynamically;
/// callers keep results independent of scheduling by writing to slot i.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

/// Engine for one independent stream, a pure function of (master seed,
/// stream tag, index). Synthesis shots, sampling blocks and bootstrap
/// resamples all draw from streams derived this way.
std::mt19937_64 stream_engine(std::uint64_t seed, std::uint32_t tag,
                              std::uint64_t index);

namespace stream_tag {
inline constexpr std::uint32_t kShot = 0x53484f54;       // "SHOT"
inline constexpr std::uint32_t kSample = 0x53414d50;     // "SAMP"
inline constexpr std::uint32_t kBootstrap = 0x424f4f54;  // "BOOT"
}  // namespace stream_tag

}  // namespace rase
