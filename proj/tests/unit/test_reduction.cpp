// Copyright 2026 The rtcg-kit Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "support.hpp"

using namespace rtcg;
using rtcg::testing::Sandbox;

namespace {

ReductionOptions with(const std::shared_ptr<Context> &ctx, bool check = true) {
  ReductionOptions o;
  o.context = ctx;
  o.check_neutral = check;
  return o;
}

ReductionSpec sum_of(Dtype in, Dtype out) {
  ReductionSpec s;
  s.out = out;
  s.signature = parse_signature(std::string(c_name(in)) + " *x");
  s.name = "sum";
  return s;
}

ReductionSpec max_of(Dtype d) {
  ReductionSpec s = sum_of(d, d);
  s.neutral = is_float(d) ? "-INFINITY" : std::string(c_name(d)) == "int32_t" ? "INT32_MIN" : "0";
  s.reduce_expr = "a > b ? a : b";
  s.name = "maximum";
  return s;
}

} // namespace

TEST(Reduction, SumOfSmallArray) {
  Sandbox sb;
  auto sum = make_reduction(sum_of(Dtype::float64, Dtype::float64), with(sb.ctx));
  auto x = from_host(sb.ctx->pool(), std::vector<double>{1, 2, 3, 4});
  const auto r = sum({x}, 4);
  EXPECT_EQ(r.dtype(), Dtype::float64);
  EXPECT_EQ(r.as<double>(), 10.0);
}

TEST(Reduction, DotProduct) {
  Sandbox sb;
  ReductionSpec spec;
  spec.out = Dtype::float32;
  spec.signature = parse_signature("float *x, float *y");
  spec.map_expr = "x[i]*y[i]";
  spec.name = "dot";
  auto dot = make_reduction(spec, with(sb.ctx));
  auto x = from_host(sb.ctx->pool(), std::vector<float>{1, 2});
  auto y = from_host(sb.ctx->pool(), std::vector<float>{3, 4});
  EXPECT_EQ(dot({x, y}, 2).as<float>(), 11.0f);
}

TEST(Reduction, EmptyInputYieldsTheNeutralElement) {
  Sandbox sb;
  auto mx = make_reduction(max_of(Dtype::float64), with(sb.ctx));
  auto x = alloc(sb.ctx->pool(), Dtype::float64, {0});
  const auto r = mx({x}, 0);
  EXPECT_TRUE(std::isinf(r.as<double>()));
  EXPECT_LT(r.as<double>(), 0);
  auto sum = make_reduction(sum_of(Dtype::int32, Dtype::int64), with(sb.ctx));
  auto xi = alloc(sb.ctx->pool(), Dtype::int32, {0});
  EXPECT_EQ(sum({xi}, 0).as<std::int64_t>(), 0);
}

TEST(Reduction, IntegerFoldsAreExactForEveryVariant) {
  Sandbox sb;
  auto sum = make_reduction(sum_of(Dtype::int32, Dtype::int64), with(sb.ctx));
  auto mx = make_reduction(max_of(Dtype::int32), with(sb.ctx));
  const std::int64_t n = 10007;
  const auto xs = rtcg::testing::random_values<std::int32_t>(n, 3);
  std::int64_t want_sum = 0;
  std::int32_t want_max = std::numeric_limits<std::int32_t>::min();
  for (auto v : xs) {
    want_sum += v;
    want_max = std::max(want_max, v);
  }
  auto x = from_host(sb.ctx->pool(), xs);
  for (int u : {1, 2, 4, 8, 16})
    for (int w : {1, 2, 3, 4})
      for (auto c : {Chunking::contiguous, Chunking::strided}) {
        const VariantParams v{u, w, c};
        if (w > 4 * logical_cores())
          continue;
        ASSERT_EQ(sum.run({x}, n, v).as<std::int64_t>(), want_sum) << v.to_string();
        ASSERT_EQ(mx.run({x}, n, v).as<std::int32_t>(), want_max) << v.to_string();
      }
}

TEST(Reduction, UnrollDoesNotChangeTheFoldOrder) {
  Sandbox sb;
  auto sum = make_reduction(sum_of(Dtype::float32, Dtype::float32), with(sb.ctx));
  const std::int64_t n = 3001;
  const auto xs = rtcg::testing::random_values<float>(n, 4);
  float sequential = 0.0f; // left fold in index order, as one lane runs it
  for (float v : xs)
    sequential = sequential + v;
  auto x = from_host(sb.ctx->pool(), xs);
  for (int u : {1, 2, 4, 8, 16})
    EXPECT_EQ(sum.run({x}, n, {u, 1, Chunking::contiguous}).as<float>(), sequential) << u;
}

TEST(Reduction, LargeFloat32SumMatchesTheSequentialFold) {
  Sandbox sb;
  auto sum = make_reduction(sum_of(Dtype::float32, Dtype::float32), with(sb.ctx));
  const std::int64_t n = 1000000;
  const auto xs = rtcg::testing::random_values<float>(n, 5, 0.0, 1.0);
  float sequential = 0.0f;
  for (float v : xs)
    sequential += v;
  auto x = from_host(sb.ctx->pool(), xs);
  const float got = sum.run({x}, n, {8, 1, Chunking::contiguous}).as<float>();
  EXPECT_LE(std::abs(got - sequential), 1e-6 * std::abs(sequential));
  EXPECT_EQ(sum.run({x}, n, {8, 1, Chunking::contiguous}).as<float>(), got); // reproducible
}

// Several lanes reassociate the fold; the oracle folds each lane's ranges in
// order and then the lane partials in lane order.
TEST(Reduction, MultiLaneFloatSumMatchesTheLaneFold) {
  Sandbox sb;
  auto sum = make_reduction(sum_of(Dtype::float32, Dtype::float32), with(sb.ctx));
  const std::int64_t n = 100003;
  const auto xs = rtcg::testing::random_values<float>(n, 6, 0.0, 1.0);
  auto x = from_host(sb.ctx->pool(), xs);
  for (int w : {2, 3, 4})
    for (auto c : {Chunking::contiguous, Chunking::strided}) {
      float total = 0.0f;
      for (const auto &lane : partition(n, w, c)) {
        if (lane.empty())
          continue;
        float acc = 0.0f;
        for (const auto &r : lane)
          for (auto i = r.begin; i < r.end; ++i)
            acc += xs[static_cast<std::size_t>(i)];
        total += acc;
      }
      EXPECT_EQ(sum.run({x}, n, {4, w, c}).as<float>(), total) << w;
    }
}

TEST(Reduction, ScalarArgumentsReachTheMap) {
  Sandbox sb;
  ReductionSpec spec;
  spec.out = Dtype::float64;
  spec.signature = parse_signature("double c, double *x");
  spec.map_expr = "c*x[i]";
  spec.name = "scaled_sum";
  auto k = make_reduction(spec, with(sb.ctx));
  auto x = from_host(sb.ctx->pool(), std::vector<double>{1, 2, 3});
  EXPECT_EQ(k({2.0, x}, 3).as<double>(), 12.0);
}

TEST(Reduction, InvalidNeutralIsRejected) {
  Sandbox sb;
  auto spec = sum_of(Dtype::float64, Dtype::float64);
  spec.neutral = "1";
  EXPECT_THROW(make_reduction(spec, with(sb.ctx)), InvalidNeutral);
  EXPECT_FALSE(verify_neutral(spec, *sb.ctx));
  EXPECT_TRUE(verify_neutral(sum_of(Dtype::float64, Dtype::float64), *sb.ctx));
  EXPECT_NO_THROW(make_reduction(spec, with(sb.ctx, false)));
  auto prod = sum_of(Dtype::int64, Dtype::int64);
  prod.reduce_expr = "a * b";
  prod.neutral = "1";
  EXPECT_TRUE(verify_neutral(prod, *sb.ctx));
}

TEST(Reduction, SpecValidation) {
  Sandbox sb;
  ReductionSpec two;
  two.signature = parse_signature("float *x, float *y");
  EXPECT_THROW(make_reduction(two, with(sb.ctx)), ParseError); // map needed
  auto bad = sum_of(Dtype::float32, Dtype::float32);
  bad.name = "rtcg_sum";
  EXPECT_THROW(make_reduction(bad, with(sb.ctx)), ParseError);
}

TEST(Reduction, SourceHasBothStages) {
  const auto src = generate_reduction_source(sum_of(Dtype::float32, Dtype::float64),
                                             {2, 1, Chunking::contiguous});
  EXPECT_NE(src.find("static double rtcg_reduce(double a, double b)"), std::string::npos);
  EXPECT_NE(src.find("void sum(void **args, long start, long end)"), std::string::npos);
  EXPECT_NE(src.find("void sum_combine(void **args, long start, long end)"), std::string::npos);
  EXPECT_NE(src.find("rtcg_resume ? *rtcg_acc_out : (0)"), std::string::npos);
}

TEST(Reduction, ArgumentChecks) {
  Sandbox sb;
  auto sum = make_reduction(sum_of(Dtype::float32, Dtype::float32), with(sb.ctx));
  auto d = alloc(sb.ctx->pool(), Dtype::float64, {3});
  EXPECT_THROW(sum({d}, 3), DtypeMismatch);
  auto f = alloc(sb.ctx->pool(), Dtype::float32, {3});
  EXPECT_THROW(sum({f}, 4), ShapeMismatch);
  EXPECT_THROW(sum({f, f}, 3), ArityMismatch);
}
