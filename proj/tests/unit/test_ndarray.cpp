// Copyright 2026 The rtcg-kit Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "rtcg/ndarray.hpp"

using namespace rtcg;

TEST(NdArray, AllocIsZeroedAndSized) {
  auto pool = std::make_shared<MemoryPool>();
  auto a = alloc(pool, Dtype::int16, {3, 5});
  EXPECT_EQ(a.size(), 15);
  EXPECT_EQ(a.nbytes(), 30u);
  EXPECT_EQ(a.shape(), (Shape{3, 5}));
  for (auto v : a.view<std::int16_t>())
    EXPECT_EQ(v, 0);
  EXPECT_EQ(reinterpret_cast<std::uintptr_t>(a.data()) % 64, 0u);
}

TEST(NdArray, ZeroExtentHoldsNoBlock) {
  auto pool = std::make_shared<MemoryPool>();
  auto a = alloc(pool, Dtype::float32, {4, 0});
  EXPECT_TRUE(a.empty());
  EXPECT_EQ(a.data(), nullptr);
  EXPECT_EQ(pool->counters().allocations_served, 0u);
  EXPECT_TRUE(a.to_host<float>().empty());
}

TEST(NdArray, NegativeExtentIsRejected) {
  EXPECT_THROW(alloc(nullptr, Dtype::float32, {-1}), ShapeMismatch);
}

TEST(NdArray, RoundTripsHostData) {
  auto pool = std::make_shared<MemoryPool>();
  const std::vector<double> v = {1.5, -2.25, 1e300};
  auto a = from_host(pool, v);
  EXPECT_EQ(a.dtype(), Dtype::float64);
  EXPECT_EQ(a.to_host<double>(), v);
}

TEST(NdArray, FromHostConvertsWithCSemantics) {
  auto pool = std::make_shared<MemoryPool>();
  const std::vector<double> v = {1.9, -1.9, 300.0};
  auto a = from_host<double>(pool, Dtype::int32, {3}, v);
  EXPECT_EQ(a.to_host<std::int32_t>(), (std::vector<std::int32_t>{1, -1, 300}));
  const std::vector<int> w = {1, 2};
  EXPECT_THROW(from_host<int>(pool, Dtype::int32, {3}, w), LengthMismatch);
}

TEST(NdArray, WrongElementTypeIsADtypeMismatch) {
  auto a = alloc(nullptr, Dtype::float32, {2});
  EXPECT_THROW(a.view<double>(), DtypeMismatch);
  EXPECT_THROW(a.to_host<std::int32_t>(), DtypeMismatch);
}

TEST(NdArray, FreeReturnsTheBlockToThePool) {
  auto pool = std::make_shared<MemoryPool>();
  {
    auto a = alloc(pool, Dtype::float32, {1024});
    EXPECT_EQ(pool->counters().bytes_live, 4096u);
    free(a);
    EXPECT_TRUE(a.empty());
    EXPECT_EQ(pool->counters().bytes_live, 0u);
    free(a); // idempotent
  }
  { auto b = alloc(pool, Dtype::float32, {1000}); }
  const auto c = pool->counters();
  EXPECT_EQ(c.pool_hits, 1u);
  EXPECT_EQ(c.bytes_live, 0u);
}

TEST(NdArray, MoveTransfersOwnership) {
  auto pool = std::make_shared<MemoryPool>();
  auto a = from_host(pool, std::vector<int>{1, 2, 3});
  const void *p = a.data();
  NdArray b = std::move(a);
  EXPECT_EQ(b.data(), p);
  EXPECT_EQ(a.data(), nullptr);
  a = std::move(b);
  EXPECT_EQ(a.to_host<int>(), (std::vector<int>{1, 2, 3}));
  EXPECT_EQ(pool->counters().bytes_live, 64u);
}

TEST(NdArray, CloneIsDeep) {
  auto a = from_host(nullptr, std::vector<float>{1, 2});
  auto b = a.clone();
  b.view<float>()[0] = 9;
  EXPECT_EQ(a.to_host<float>()[0], 1.0f);
  EXPECT_EQ(b.dtype(), a.dtype());
  EXPECT_EQ(zeros_like(a).to_host<float>(), (std::vector<float>{0, 0}));
}

TEST(Shape, Helpers) {
  EXPECT_EQ(shape_string({2, 3}), "[2,3]");
  EXPECT_EQ(shape_string({}), "[]");
  EXPECT_EQ(shape_product({}), 1);
  EXPECT_EQ(shape_product({2, 3, 4}), 24);
}
