// Copyright 2026 The rtcg-kit Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef RTCG_SLICING_HPP
#define RTCG_SLICING_HPP

// Loop slicing: how an index space [0, n) is split across worker lanes and
// unrolled within each lane. These are the tunable code-variant parameters.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "rtcg/autotune.hpp"
#include "rtcg/error.hpp"

namespace rtcg {

enum class Chunking { contiguous, strided };

inline std::string_view to_string(Chunking c) {
  return c == Chunking::contiguous ? "contiguous" : "strided";
}

inline Chunking chunking_from_string(std::string_view s) {
  if (s == "contiguous")
    return Chunking::contiguous;
  if (s == "strided")
    return Chunking::strided;
  throw InvalidVariant("unknown chunking '" + std::string(s) + "'");
}

inline constexpr std::int64_t kUnrollCandidates[] = {1, 2, 4, 8, 16};

/// Elements per block when lanes take blocks round-robin (strided chunking).
inline constexpr std::int64_t kStridedBlock = 1024;

inline int logical_cores() {
  const auto n = std::thread::hardware_concurrency();
  return n ? static_cast<int>(n) : 1;
}

struct VariantParams {
  int unroll = 4;
  int workers = 1;
  Chunking chunking = Chunking::contiguous;

  static VariantParams host_default() { return {4, logical_cores(), Chunking::contiguous}; }

  /// Throws InvalidVariant unless unroll is a candidate and
  /// 1 <= workers <= 4 x logical cores.
  void validate() const {
    if (std::find(std::begin(kUnrollCandidates), std::end(kUnrollCandidates), unroll) ==
        std::end(kUnrollCandidates))
      throw InvalidVariant("unroll " + std::to_string(unroll) + " is not one of 1,2,4,8,16");
    if (workers < 1 || workers > 4 * logical_cores())
      throw InvalidVariant("workers " + std::to_string(workers) + " outside [1, " +
                           std::to_string(4 * logical_cores()) + "]");
  }

  /// Reads `unroll`, `workers` and `chunking` axes; absent axes keep the
  /// host defaults.
  static VariantParams from_assignment(const autotune::Assignment &a) {
    auto v = host_default();
    if (a.find("unroll"))
      v.unroll = static_cast<int>(a.get_int("unroll"));
    if (a.find("workers"))
      v.workers = static_cast<int>(a.get_int("workers"));
    if (a.find("chunking"))
      v.chunking = chunking_from_string(a.get_str("chunking"));
    return v;
  }

  std::string to_string() const {
    return "unroll=" + std::to_string(unroll) + ",workers=" + std::to_string(workers) +
           ",chunking=" + std::string(rtcg::to_string(chunking));
  }

  friend bool operator==(const VariantParams &, const VariantParams &) = default;
};

struct IndexRange {
  std::int64_t begin = 0;
  std::int64_t end = 0;
  friend bool operator==(const IndexRange &, const IndexRange &) = default;
};

/// Per-lane index ranges. Contiguous: lane w gets one block, the first
/// n % workers lanes one element longer. Strided: blocks of `block`
/// elements dealt round-robin. Ranges are disjoint and cover [0, n).
inline std::vector<std::vector<IndexRange>> partition(std::int64_t n, int workers, Chunking chunking,
                                                      std::int64_t block = kStridedBlock) {
  if (workers < 1)
    throw InvalidVariant("partition needs at least one worker");
  std::vector<std::vector<IndexRange>> lanes(static_cast<std::size_t>(workers));
  if (n <= 0)
    return lanes;
  if (chunking == Chunking::contiguous) {
    const auto base = n / workers, extra = n % workers;
    std::int64_t at = 0;
    for (int w = 0; w < workers; ++w) {
      const auto len = base + (w < extra ? 1 : 0);
      if (len > 0)
        lanes[static_cast<std::size_t>(w)].push_back({at, at + len});
      at += len;
    }
  } else {
    std::size_t w = 0;
    for (std::int64_t at = 0; at < n; at += block) {
      lanes[w].push_back({at, std::min(n, at + block)});
      w = (w + 1) % lanes.size();
    }
  }
  return lanes;
}

/// Runs fn(lane) for every lane and joins; lane 0 runs on the caller.
inline void run_lanes(std::size_t lanes, const std::function<void(std::size_t)> &fn) {
  if (lanes == 0)
    return;
  std::vector<std::jthread> threads;
  threads.reserve(lanes - 1);
  for (std::size_t w = 1; w < lanes; ++w)
    threads.emplace_back([&fn, w] { fn(w); });
  fn(0);
}

} // namespace rtcg

#endif // RTCG_SLICING_HPP
