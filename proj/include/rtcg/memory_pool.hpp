// Copyright 2026 The rtcg-kit Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef RTCG_MEMORY_POOL_HPP
#define RTCG_MEMORY_POOL_HPP

#include <array>
#include <bit>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <memory>
#include <mutex>
#include <vector>

#include "rtcg/error.hpp"

namespace rtcg {

/// The allocator the pool draws from. `allocate` returns nullptr on failure
/// and must return 64-byte aligned memory.
struct SystemAllocator {
  std::function<void *(std::size_t)> allocate;
  std::function<void(void *, std::size_t)> deallocate;

  static SystemAllocator aligned() {
    return {[](std::size_t n) { return std::aligned_alloc(64, n); },
            [](void *p, std::size_t) { std::free(p); }};
  }
};

struct PoolCounters {
  std::size_t allocations_served = 0; // non-empty allocate() calls
  std::size_t pool_hits = 0;          // served from a free list
  std::size_t system_allocations = 0;
  std::size_t system_failures = 0;
  std::size_t releases = 0;           // release_free() calls, incl. OOM retries
  std::uintmax_t bytes_held = 0;      // sitting on free lists
  std::uintmax_t bytes_live = 0;      // handed out, not yet returned
  std::uintmax_t bytes_obtained = 0;  // ever obtained from the system
  std::uintmax_t bytes_returned = 0;  // ever given back to the system
};

/// Caching allocator with power-of-two size classes from 64 B to 1 GiB.
/// Freed blocks go to their class's free list instead of the system; larger
/// requests bypass the pool. Internally synchronised.
class MemoryPool {
public:
  static constexpr std::size_t kMinClass = 64;
  static constexpr std::size_t kMaxClass = std::size_t{1} << 30;
  static constexpr int kNumClasses = 25; // 2^6 .. 2^30

  struct Block {
    void *ptr = nullptr;
    std::size_t capacity = 0;
  };

  explicit MemoryPool(SystemAllocator sys = SystemAllocator::aligned()) : sys_(std::move(sys)) {}
  MemoryPool(const MemoryPool &) = delete;
  MemoryPool &operator=(const MemoryPool &) = delete;
  ~MemoryPool() { release_free(); }

  /// Capacity a request of `bytes` is served with: the enclosing size class,
  /// or `bytes` rounded up to 64 for requests beyond the largest class.
  static std::size_t size_class(std::size_t bytes) {
    if (bytes <= kMinClass)
      return kMinClass;
    if (bytes > kMaxClass)
      return (bytes + 63) / 64 * 64;
    return std::bit_ceil(bytes);
  }

  /// A block of at least `bytes`, with the first `bytes` zeroed. A zero-byte
  /// request returns an empty block and touches no counters.
  Block allocate(std::size_t bytes) {
    if (bytes == 0)
      return {};
    const auto cap = size_class(bytes);
    Block b;
    {
      std::lock_guard lock(mu_);
      ++c_.allocations_served;
      if (auto *list = free_list(cap); list && !list->empty()) {
        b = {list->back(), cap};
        list->pop_back();
        ++c_.pool_hits;
        c_.bytes_held -= cap;
        c_.bytes_live += cap;
      }
    }
    if (!b.ptr)
      b = obtain(cap);
    std::memset(b.ptr, 0, bytes);
    return b;
  }

  void deallocate(Block b) {
    if (!b.ptr)
      return;
    std::lock_guard lock(mu_);
    c_.bytes_live -= b.capacity;
    if (auto *list = free_list(b.capacity)) {
      list->push_back(b.ptr);
      c_.bytes_held += b.capacity;
    } else {
      sys_.deallocate(b.ptr, b.capacity);
      c_.bytes_returned += b.capacity;
    }
  }

  /// Returns every free-list block to the system.
  void release_free() {
    std::lock_guard lock(mu_);
    release_locked();
  }

  PoolCounters counters() const {
    std::lock_guard lock(mu_);
    return c_;
  }

private:
  std::vector<void *> *free_list(std::size_t cap) {
    if (cap < kMinClass || cap > kMaxClass || !std::has_single_bit(cap))
      return nullptr;
    return &lists_[std::countr_zero(cap) - std::countr_zero(kMinClass)];
  }

  void release_locked() {
    ++c_.releases;
    for (std::size_t k = 0; k < lists_.size(); ++k) {
      const std::size_t cap = kMinClass << k;
      for (void *p : lists_[k]) {
        sys_.deallocate(p, cap);
        c_.bytes_returned += cap;
        c_.bytes_held -= cap;
      }
      lists_[k].clear();
    }
  }

  // On failure, free-list blocks are released and the request retried once.
  Block obtain(std::size_t cap) {
    std::lock_guard lock(mu_);
    void *p = sys_.allocate(cap);
    if (!p) {
      ++c_.system_failures;
      release_locked();
      p = sys_.allocate(cap);
      if (!p) {
        ++c_.system_failures;
        --c_.allocations_served;
        throw OutOfMemory("cannot allocate " + std::to_string(cap) + " bytes");
      }
    }
    ++c_.system_allocations;
    c_.bytes_obtained += cap;
    c_.bytes_live += cap;
    return {p, cap};
  }

  SystemAllocator sys_;
  mutable std::mutex mu_;
  std::array<std::vector<void *>, kNumClasses> lists_;
  PoolCounters c_;
};

inline const std::shared_ptr<MemoryPool> &default_pool() {
  static const auto pool = std::make_shared<MemoryPool>();
  return pool;
}

} // namespace rtcg

#endif // RTCG_MEMORY_POOL_HPP
