// Copyright 2026 The rtcg-kit Authors
// SPDX-License-Identifier: Apache-2.0

#include <map>
#include <random>
#include <thread>

#include <gtest/gtest.h>

#include "rtcg/memory_pool.hpp"

using namespace rtcg;

namespace {

void expect_conserved(const PoolCounters &c) {
  EXPECT_EQ(c.bytes_held + c.bytes_live, c.bytes_obtained - c.bytes_returned);
}

// A system allocator that fails whenever asked to, counting calls.
struct FlakySystem {
  int fail_next = 0;
  bool fail_always = false;
  int calls = 0;
  std::size_t outstanding = 0;

  SystemAllocator allocator() {
    return {[this](std::size_t n) -> void * {
              ++calls;
              if (fail_always || fail_next > 0) {
                --fail_next;
                return nullptr;
              }
              outstanding += n;
              return std::aligned_alloc(64, n);
            },
            [this](void *p, std::size_t n) {
              outstanding -= n;
              std::free(p);
            }};
  }
};

} // namespace

TEST(SizeClass, PowersOfTwoFrom64) {
  EXPECT_EQ(MemoryPool::size_class(1), 64u);
  EXPECT_EQ(MemoryPool::size_class(64), 64u);
  EXPECT_EQ(MemoryPool::size_class(65), 128u);
  EXPECT_EQ(MemoryPool::size_class(4000), 4096u);
  EXPECT_EQ(MemoryPool::size_class(4096), 4096u);
  EXPECT_EQ(MemoryPool::size_class(std::size_t{1} << 30), std::size_t{1} << 30);
  EXPECT_EQ(MemoryPool::size_class((std::size_t{1} << 30) + 1), (std::size_t{1} << 30) + 64);
}

TEST(MemoryPool, RepeatedAllocFreeHitsThePool) {
  MemoryPool pool;
  for (int k = 0; k < 100; ++k)
    pool.deallocate(pool.allocate(4096));
  const auto c = pool.counters();
  EXPECT_EQ(c.allocations_served, 100u);
  EXPECT_EQ(c.pool_hits, 99u);
  EXPECT_EQ(c.system_allocations, 1u);
  EXPECT_EQ(c.bytes_held, 4096u);
  EXPECT_EQ(c.bytes_live, 0u);
  expect_conserved(c);
}

TEST(MemoryPool, SimilarSizesShareAClass) {
  MemoryPool pool;
  pool.deallocate(pool.allocate(1024 * 4)); // float32[1024]
  pool.allocate(1000 * 4);                  // float32[1000], same 4096-byte class
  EXPECT_EQ(pool.counters().pool_hits, 1u);
}

TEST(MemoryPool, ZeroBytesTouchesNothing) {
  MemoryPool pool;
  auto b = pool.allocate(0);
  EXPECT_EQ(b.ptr, nullptr);
  pool.deallocate(b);
  const auto c = pool.counters();
  EXPECT_EQ(c.allocations_served, 0u);
  EXPECT_EQ(c.system_allocations, 0u);
  EXPECT_EQ(c.bytes_obtained, 0u);
}

TEST(MemoryPool, BlocksAreZeroedAndAligned) {
  MemoryPool pool;
  auto b = pool.allocate(256);
  std::memset(b.ptr, 0xff, 256);
  pool.deallocate(b);
  auto again = pool.allocate(200);
  EXPECT_EQ(again.ptr, b.ptr);
  const auto *bytes = static_cast<const unsigned char *>(again.ptr);
  for (int k = 0; k < 200; ++k)
    ASSERT_EQ(bytes[k], 0) << k;
  EXPECT_EQ(reinterpret_cast<std::uintptr_t>(again.ptr) % 64, 0u);
}

TEST(MemoryPool, OversizedBlocksGoStraightBackToTheSystem) {
  // Exercised through deallocate() so no gigabyte is ever touched.
  std::vector<std::size_t> returned;
  MemoryPool pool({[](std::size_t n) { return std::aligned_alloc(64, n); },
                   [&returned](void *p, std::size_t n) {
                     returned.push_back(n);
                     std::free(p);
                   }});
  auto small = pool.allocate(64);
  pool.deallocate(small);
  EXPECT_TRUE(returned.empty());
  const std::size_t huge = MemoryPool::size_class(MemoryPool::kMaxClass + 1);
  pool.deallocate({std::aligned_alloc(64, 64), huge});
  ASSERT_EQ(returned.size(), 1u);
  EXPECT_EQ(returned[0], huge);
  EXPECT_EQ(pool.counters().bytes_returned, huge);
}

TEST(MemoryPool, ReleaseFreeReturnsEverything) {
  FlakySystem sys;
  {
    MemoryPool pool(sys.allocator());
    std::vector<MemoryPool::Block> blocks;
    for (std::size_t s : {64, 100, 5000, 5000, 70000})
      blocks.push_back(pool.allocate(s));
    for (auto &b : blocks)
      pool.deallocate(b);
    EXPECT_GT(pool.counters().bytes_held, 0u);
    pool.release_free();
    const auto c = pool.counters();
    EXPECT_EQ(c.bytes_held, 0u);
    EXPECT_EQ(c.bytes_obtained, c.bytes_returned);
    EXPECT_EQ(sys.outstanding, 0u);
    expect_conserved(c);
  }
}

TEST(MemoryPool, FailureReleasesAndRetriesOnce) {
  FlakySystem sys;
  MemoryPool pool(sys.allocator());
  pool.deallocate(pool.allocate(128));
  EXPECT_EQ(pool.counters().bytes_held, 128u);

  sys.fail_next = 1;
  auto b = pool.allocate(1 << 16); // first attempt fails, retry succeeds
  ASSERT_NE(b.ptr, nullptr);
  const auto c = pool.counters();
  EXPECT_EQ(c.system_failures, 1u);
  EXPECT_EQ(c.releases, 1u);
  EXPECT_EQ(c.bytes_held, 0u); // the cached block went back to the system
  expect_conserved(c);
  pool.deallocate(b);
}

TEST(MemoryPool, PersistentFailureIsOutOfMemory) {
  FlakySystem sys;
  MemoryPool pool(sys.allocator());
  sys.fail_always = true;
  EXPECT_THROW(pool.allocate(1024), OutOfMemory);
  const auto c = pool.counters();
  EXPECT_EQ(c.system_failures, 2u);
  EXPECT_EQ(sys.calls, 2);
  EXPECT_EQ(c.allocations_served, 0u);
  expect_conserved(c);
}

// Counter model: replay a random alloc/free trace against a simple
// free-list simulation and compare every counter.
TEST(MemoryPool, CountersFollowTheFreeListModel) {
  MemoryPool pool;
  std::mt19937 rng(11);
  std::vector<MemoryPool::Block> live;
  std::map<std::size_t, int> model_free;
  std::size_t served = 0, hits = 0, sys_allocs = 0;
  std::uintmax_t held = 0, live_bytes = 0;
  for (int step = 0; step < 2000; ++step) {
    if (live.empty() || rng() % 3 != 0) {
      const std::size_t bytes = 1 + rng() % 20000;
      const auto cls = MemoryPool::size_class(bytes);
      ++served;
      if (model_free[cls] > 0) {
        --model_free[cls];
        ++hits;
        held -= cls;
      } else {
        ++sys_allocs;
      }
      live_bytes += cls;
      live.push_back(pool.allocate(bytes));
      ASSERT_EQ(live.back().capacity, cls);
    } else {
      const auto idx = rng() % live.size();
      const auto b = live[idx];
      live.erase(live.begin() + static_cast<std::ptrdiff_t>(idx));
      ++model_free[b.capacity];
      held += b.capacity;
      live_bytes -= b.capacity;
      pool.deallocate(b);
    }
    const auto c = pool.counters();
    ASSERT_EQ(c.allocations_served, served);
    ASSERT_EQ(c.pool_hits, hits);
    ASSERT_EQ(c.system_allocations, sys_allocs);
    ASSERT_EQ(c.bytes_held, held);
    ASSERT_EQ(c.bytes_live, live_bytes);
    expect_conserved(c);
  }
  for (auto &b : live)
    pool.deallocate(b);
}

TEST(MemoryPool, ThreadSafe) {
  MemoryPool pool;
  {
    std::vector<std::jthread> threads;
    for (int t = 0; t < 4; ++t)
      threads.emplace_back([&pool, t] {
        for (int k = 0; k < 500; ++k) {
          auto b = pool.allocate(64u << ((k + t) % 6));
          static_cast<char *>(b.ptr)[0] = 1;
          pool.deallocate(b);
        }
      });
  }
  const auto c = pool.counters();
  EXPECT_EQ(c.allocations_served, 2000u);
  EXPECT_EQ(c.bytes_live, 0u);
  expect_conserved(c);
}
