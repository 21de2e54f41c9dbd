// Copyright 2026 The rtcg-kit Authors
// SPDX-License-Identifier: Apache-2.0

#include <atomic>

#include <gtest/gtest.h>

#include "rtcg/slicing.hpp"

using namespace rtcg;

namespace {

// Every index in [0, n) is claimed exactly once, ranges are non-empty.
void expect_exact_cover(const std::vector<std::vector<IndexRange>> &lanes, std::int64_t n) {
  std::vector<int> hits(static_cast<std::size_t>(std::max<std::int64_t>(n, 0)), 0);
  for (const auto &lane : lanes)
    for (const auto &r : lane) {
      ASSERT_LT(r.begin, r.end);
      ASSERT_GE(r.begin, 0);
      ASSERT_LE(r.end, n);
      for (auto i = r.begin; i < r.end; ++i)
        ++hits[static_cast<std::size_t>(i)];
    }
  for (std::size_t i = 0; i < hits.size(); ++i)
    ASSERT_EQ(hits[i], 1) << "index " << i;
}

} // namespace

TEST(Partition, CoversExactlyOnce) {
  for (std::int64_t n : {0, 1, 2, 7, 1000, 1023, 1024, 1025, 5000})
    for (int w : {1, 2, 3, 4, 7, 16})
      for (auto c : {Chunking::contiguous, Chunking::strided}) {
        SCOPED_TRACE(std::to_string(n) + " " + std::to_string(w));
        const auto lanes = partition(n, w, c);
        ASSERT_EQ(lanes.size(), static_cast<std::size_t>(w));
        expect_exact_cover(lanes, n);
      }
}

TEST(Partition, ContiguousBalancesWithinOne) {
  const auto lanes = partition(10, 4, Chunking::contiguous);
  EXPECT_EQ(lanes[0], (std::vector<IndexRange>{{0, 3}}));
  EXPECT_EQ(lanes[1], (std::vector<IndexRange>{{3, 6}}));
  EXPECT_EQ(lanes[2], (std::vector<IndexRange>{{6, 8}}));
  EXPECT_EQ(lanes[3], (std::vector<IndexRange>{{8, 10}}));
}

TEST(Partition, FewerElementsThanWorkersLeavesTrailingLanesEmpty) {
  const auto lanes = partition(2, 4, Chunking::contiguous);
  EXPECT_EQ(lanes[0].size(), 1u);
  EXPECT_EQ(lanes[1].size(), 1u);
  EXPECT_TRUE(lanes[2].empty());
  EXPECT_TRUE(lanes[3].empty());
}

TEST(Partition, StridedDealsBlocksRoundRobin) {
  const auto lanes = partition(10, 2, Chunking::strided, 3);
  EXPECT_EQ(lanes[0], (std::vector<IndexRange>{{0, 3}, {6, 9}}));
  EXPECT_EQ(lanes[1], (std::vector<IndexRange>{{3, 6}, {9, 10}}));
}

TEST(Partition, NeedsAWorker) { EXPECT_THROW(partition(10, 0, Chunking::contiguous), InvalidVariant); }

TEST(Variant, Validate) {
  EXPECT_NO_THROW((VariantParams{1, 1, Chunking::contiguous}.validate()));
  EXPECT_NO_THROW((VariantParams{16, 4 * logical_cores(), Chunking::strided}.validate()));
  EXPECT_THROW((VariantParams{3, 1, Chunking::contiguous}.validate()), InvalidVariant);
  EXPECT_THROW((VariantParams{0, 1, Chunking::contiguous}.validate()), InvalidVariant);
  EXPECT_THROW((VariantParams{4, 0, Chunking::contiguous}.validate()), InvalidVariant);
  EXPECT_THROW((VariantParams{4, 4 * logical_cores() + 1, Chunking::contiguous}.validate()),
               InvalidVariant);
}

TEST(Variant, FromAssignmentAndText) {
  const autotune::Assignment a({{"unroll", std::int64_t{8}}, {"chunking", std::string("strided")}});
  const auto v = VariantParams::from_assignment(a);
  EXPECT_EQ(v.unroll, 8);
  EXPECT_EQ(v.workers, logical_cores());
  EXPECT_EQ(v.chunking, Chunking::strided);
  EXPECT_EQ((VariantParams{2, 3, Chunking::contiguous}.to_string()),
            "unroll=2,workers=3,chunking=contiguous");
  EXPECT_THROW(chunking_from_string("diagonal"), InvalidVariant);
}

TEST(RunLanes, EveryLaneRunsOnce) {
  std::vector<std::atomic<int>> seen(5);
  run_lanes(5, [&](std::size_t w) { ++seen[w]; });
  for (auto &s : seen)
    EXPECT_EQ(s.load(), 1);
  run_lanes(0, [](std::size_t) { FAIL(); });
}
