// Copyright 2026 The rtcg-kit Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef RTCG_NDARRAY_HPP
#define RTCG_NDARRAY_HPP

#include <cstdint>
#include <cstring>
#include <memory>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rtcg/dtype.hpp"
#include "rtcg/error.hpp"
#include "rtcg/memory_pool.hpp"

namespace rtcg {

using Shape = std::vector<std::int64_t>;

inline std::string shape_string(const Shape &s) {
  std::string out = "[";
  for (std::size_t k = 0; k < s.size(); ++k)
    out += (k ? "," : "") + std::to_string(s[k]);
  return out + "]";
}

inline std::int64_t shape_product(const Shape &s) {
  std::int64_t n = 1;
  for (auto e : s) {
    if (e < 0)
      throw ShapeMismatch("negative extent in shape " + shape_string(s));
    n *= e;
  }
  return n;
}

/// A contiguous row-major array of one dtype, owning a block from a
/// MemoryPool. Move-only; the block goes back to the pool on destruction or
/// free(). Zero-extent shapes hold no elements and no block.
class NdArray {
public:
  NdArray() = default;

  NdArray(std::shared_ptr<MemoryPool> pool, Dtype dtype, Shape shape)
      : pool_(std::move(pool)), dtype_(dtype), shape_(std::move(shape)),
        size_(shape_product(shape_)) {
    if (!pool_)
      pool_ = default_pool();
    block_ = pool_->allocate(nbytes());
  }

  NdArray(const NdArray &) = delete;
  NdArray &operator=(const NdArray &) = delete;
  NdArray(NdArray &&o) noexcept { swap(o); }
  NdArray &operator=(NdArray &&o) noexcept {
    if (this != &o) {
      free();
      swap(o);
    }
    return *this;
  }
  ~NdArray() { free(); }

  Dtype dtype() const noexcept { return dtype_; }
  const Shape &shape() const noexcept { return shape_; }
  std::int64_t size() const noexcept { return size_; }
  std::size_t nbytes() const noexcept { return static_cast<std::size_t>(size_) * size_of(dtype_); }
  bool empty() const noexcept { return size_ == 0; }
  const std::shared_ptr<MemoryPool> &pool() const noexcept { return pool_; }

  void *data() noexcept { return block_.ptr; }
  const void *data() const noexcept { return block_.ptr; }

  template <Element T> std::span<T> view() {
    check_dtype<T>();
    return {static_cast<T *>(block_.ptr), static_cast<std::size_t>(size_)};
  }
  template <Element T> std::span<const T> view() const {
    check_dtype<T>();
    return {static_cast<const T *>(block_.ptr), static_cast<std::size_t>(size_)};
  }

  /// Copies the elements out. T must match the array's dtype.
  template <Element T> std::vector<T> to_host() const {
    auto v = view<T>();
    return {v.begin(), v.end()};
  }

  /// Returns the block to the pool; the array becomes empty.
  void free() {
    if (pool_ && block_.ptr)
      pool_->deallocate(block_);
    block_ = {};
    size_ = 0;
    shape_.clear();
  }

  NdArray clone() const {
    NdArray out(pool_, dtype_, shape_);
    if (nbytes())
      std::memcpy(out.data(), data(), nbytes());
    return out;
  }

private:
  template <class T> void check_dtype() const {
    if (dtype_of<T> != dtype_)
      throw DtypeMismatch("array has dtype " + std::string(dtype_name(dtype_)) +
                          ", accessed as " + std::string(dtype_name(dtype_of<T>)));
  }

  void swap(NdArray &o) noexcept {
    std::swap(pool_, o.pool_);
    std::swap(dtype_, o.dtype_);
    std::swap(shape_, o.shape_);
    std::swap(size_, o.size_);
    std::swap(block_, o.block_);
  }

  std::shared_ptr<MemoryPool> pool_;
  Dtype dtype_ = Dtype::float64;
  Shape shape_;
  std::int64_t size_ = 0;
  MemoryPool::Block block_;
};

/// A zero-initialised array.
inline NdArray alloc(const std::shared_ptr<MemoryPool> &pool, Dtype dtype, Shape shape) {
  return NdArray(pool, dtype, std::move(shape));
}

inline void free(NdArray &a) { a.free(); }

inline NdArray zeros_like(const NdArray &a) { return NdArray(a.pool(), a.dtype(), a.shape()); }

/// Uploads `values` into a new array of `dtype`, converting each element
/// with C conversion semantics. Throws LengthMismatch.
template <class T>
  requires std::is_arithmetic_v<T>
NdArray from_host(const std::shared_ptr<MemoryPool> &pool, Dtype dtype, Shape shape,
                  std::span<const T> values) {
  NdArray out(pool, dtype, std::move(shape));
  if (static_cast<std::int64_t>(values.size()) != out.size())
    throw LengthMismatch(std::to_string(values.size()) + " values for shape " +
                         shape_string(out.shape()));
  visit_dtype(dtype, [&](auto tag) {
    using U = typename decltype(tag)::type;
    auto dst = out.view<U>();
    for (std::size_t k = 0; k < values.size(); ++k)
      dst[k] = static_cast<U>(values[k]);
  });
  return out;
}

template <Element T>
NdArray from_host(const std::shared_ptr<MemoryPool> &pool, Shape shape, std::span<const T> values) {
  return from_host<T>(pool, dtype_of<T>, std::move(shape), values);
}

template <Element T>
NdArray from_host(const std::shared_ptr<MemoryPool> &pool, const std::vector<T> &values) {
  return from_host<T>(pool, dtype_of<T>, Shape{static_cast<std::int64_t>(values.size())},
                      std::span<const T>(values));
}

} // namespace rtcg

#endif // RTCG_NDARRAY_HPP
