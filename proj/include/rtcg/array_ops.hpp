// Copyright 2026 The rtcg-kit Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef RTCG_ARRAY_OPS_HPP
#define RTCG_ARRAY_OPS_HPP

// Elementwise arithmetic on NdArrays. The result dtype is promote() of the
// operand dtypes; both operands are converted to it before the operation.
// Shapes must match exactly (no broadcasting). One kernel is generated per
// (operation, operand dtypes) and reused.

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <tuple>

#include "rtcg/elementwise.hpp"

namespace rtcg {

enum class ArithOp { add, sub, mul, div };

inline std::string_view to_string(ArithOp op) {
  switch (op) {
  case ArithOp::add: return "add";
  case ArithOp::sub: return "sub";
  case ArithOp::mul: return "mul";
  case ArithOp::div: return "div";
  }
  return "?";
}

inline char symbol(ArithOp op) {
  switch (op) {
  case ArithOp::add: return '+';
  case ArithOp::sub: return '-';
  case ArithOp::mul: return '*';
  case ArithOp::div: return '/';
  }
  return '?';
}

namespace array_ops_detail {

inline ElementwiseKernel kernel_for(const std::shared_ptr<Context> &ctx, ArithOp op, Dtype a,
                                    Dtype b, bool scalar_rhs) {
  using Key = std::tuple<Context *, ArithOp, Dtype, Dtype, bool>;
  static std::mutex mu;
  static std::map<Key, ElementwiseKernel> kernels;
  const Key key{ctx.get(), op, a, b, scalar_rhs};
  std::lock_guard lock(mu);
  if (auto it = kernels.find(key); it != kernels.end())
    return it->second;

  const Dtype r = promote(a, b);
  const std::string tr(c_name(r));
  const std::string sig = std::string(c_name(a)) + " *x, " + std::string(c_name(b)) +
                          (scalar_rhs ? " y" : " *y") + ", " + tr + " *z";
  const std::string rhs = scalar_rhs ? "y" : "y[i]";
  const std::string operation =
      "z[i] = (" + tr + ")x[i] " + symbol(op) + " (" + tr + ")" + rhs + ";";
  const std::string name = "array_" + std::string(to_string(op)) + "_" +
                           std::string(dtype_name(a)) + "_" + std::string(dtype_name(b)) +
                           (scalar_rhs ? "_scalar" : "");
  ElementwiseOptions options;
  options.context = ctx;
  return kernels.emplace(key, make_elementwise(sig, operation, name, options)).first->second;
}

inline NdArray apply(ArithOp op, const NdArray &x, const NdArray &y,
                     const std::shared_ptr<Context> &ctx) {
  if (x.shape() != y.shape())
    throw ShapeMismatch("operands have shapes " + shape_string(x.shape()) + " and " +
                        shape_string(y.shape()));
  NdArray z(x.pool(), promote(x.dtype(), y.dtype()), x.shape());
  if (x.size() > 0)
    kernel_for(ctx, op, x.dtype(), y.dtype(), false)({x, y, z}, x.size());
  return z;
}

inline NdArray apply(ArithOp op, const NdArray &x, const Scalar &y,
                     const std::shared_ptr<Context> &ctx) {
  const Dtype r = promote(x.dtype(), y.dtype());
  if (op == ArithOp::div && is_integer(r) && y.is_zero())
    throw DivisionByZero("integer division of a " + std::string(dtype_name(x.dtype())) +
                         " array by scalar zero");
  NdArray z(x.pool(), r, x.shape());
  if (x.size() > 0)
    kernel_for(ctx, op, x.dtype(), y.dtype(), true)({x, y, z}, x.size());
  return z;
}

} // namespace array_ops_detail

/// Integer division by a zero array element is undefined behaviour in the
/// generated C code; only a zero scalar divisor is checked.
inline NdArray add(const NdArray &x, const NdArray &y,
                   const std::shared_ptr<Context> &ctx = Context::default_context()) {
  return array_ops_detail::apply(ArithOp::add, x, y, ctx);
}
inline NdArray sub(const NdArray &x, const NdArray &y,
                   const std::shared_ptr<Context> &ctx = Context::default_context()) {
  return array_ops_detail::apply(ArithOp::sub, x, y, ctx);
}
inline NdArray mul(const NdArray &x, const NdArray &y,
                   const std::shared_ptr<Context> &ctx = Context::default_context()) {
  return array_ops_detail::apply(ArithOp::mul, x, y, ctx);
}
inline NdArray div(const NdArray &x, const NdArray &y,
                   const std::shared_ptr<Context> &ctx = Context::default_context()) {
  return array_ops_detail::apply(ArithOp::div, x, y, ctx);
}

inline NdArray add(const NdArray &x, const Scalar &y,
                   const std::shared_ptr<Context> &ctx = Context::default_context()) {
  return array_ops_detail::apply(ArithOp::add, x, y, ctx);
}
inline NdArray sub(const NdArray &x, const Scalar &y,
                   const std::shared_ptr<Context> &ctx = Context::default_context()) {
  return array_ops_detail::apply(ArithOp::sub, x, y, ctx);
}
inline NdArray mul(const NdArray &x, const Scalar &y,
                   const std::shared_ptr<Context> &ctx = Context::default_context()) {
  return array_ops_detail::apply(ArithOp::mul, x, y, ctx);
}
inline NdArray div(const NdArray &x, const Scalar &y,
                   const std::shared_ptr<Context> &ctx = Context::default_context()) {
  return array_ops_detail::apply(ArithOp::div, x, y, ctx);
}

inline NdArray operator+(const NdArray &x, const NdArray &y) { return add(x, y); }
inline NdArray operator-(const NdArray &x, const NdArray &y) { return sub(x, y); }
inline NdArray operator*(const NdArray &x, const NdArray &y) { return mul(x, y); }
inline NdArray operator/(const NdArray &x, const NdArray &y) { return div(x, y); }
inline NdArray operator+(const NdArray &x, const Scalar &y) { return add(x, y); }
inline NdArray operator-(const NdArray &x, const Scalar &y) { return sub(x, y); }
inline NdArray operator*(const NdArray &x, const Scalar &y) { return mul(x, y); }
inline NdArray operator/(const NdArray &x, const Scalar &y) { return div(x, y); }

} // namespace rtcg

#endif // RTCG_ARRAY_OPS_HPP
