// Copyright 2026 The rtcg-kit Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef RTCG_DTYPE_HPP
#define RTCG_DTYPE_HPP

#include <array>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <optional>
#include <string>
#include <string_view>
#include <type_traits>

#include "rtcg/error.hpp"

namespace rtcg {

enum class Dtype : std::uint8_t {
  int8,
  int16,
  int32,
  int64,
  uint8,
  uint16,
  uint32,
  uint64,
  float32,
  float64,
};

inline constexpr std::array<Dtype, 10> kAllDtypes = {
    Dtype::int8,   Dtype::int16,  Dtype::int32,  Dtype::int64,   Dtype::uint8,
    Dtype::uint16, Dtype::uint32, Dtype::uint64, Dtype::float32, Dtype::float64};

enum class DtypeKind { signed_int, unsigned_int, floating };

namespace dtype_detail {

struct Info {
  std::string_view name;
  std::string_view c_name; // as spelled in generated C (with <stdint.h>)
  std::size_t size;
  DtypeKind kind;
};

inline constexpr std::array<Info, 10> kInfo = {{
    {"int8", "int8_t", 1, DtypeKind::signed_int},
    {"int16", "int16_t", 2, DtypeKind::signed_int},
    {"int32", "int32_t", 4, DtypeKind::signed_int},
    {"int64", "int64_t", 8, DtypeKind::signed_int},
    {"uint8", "uint8_t", 1, DtypeKind::unsigned_int},
    {"uint16", "uint16_t", 2, DtypeKind::unsigned_int},
    {"uint32", "uint32_t", 4, DtypeKind::unsigned_int},
    {"uint64", "uint64_t", 8, DtypeKind::unsigned_int},
    {"float32", "float", 4, DtypeKind::floating},
    {"float64", "double", 8, DtypeKind::floating},
}};

constexpr const Info &info(Dtype d) { return kInfo[static_cast<std::size_t>(d)]; }

} // namespace dtype_detail

constexpr std::string_view dtype_name(Dtype d) { return dtype_detail::info(d).name; }
constexpr std::string_view c_name(Dtype d) { return dtype_detail::info(d).c_name; }
constexpr std::size_t size_of(Dtype d) { return dtype_detail::info(d).size; }
constexpr DtypeKind kind(Dtype d) { return dtype_detail::info(d).kind; }
constexpr bool is_float(Dtype d) { return kind(d) == DtypeKind::floating; }
constexpr bool is_integer(Dtype d) { return !is_float(d); }

inline std::optional<Dtype> dtype_from_name(std::string_view n) {
  for (auto d : kAllDtypes)
    if (dtype_name(d) == n)
      return d;
  return std::nullopt;
}

template <class T> struct DtypeOf;
#define RTCG_DTYPE_OF(T, D)                                                    \
  template <> struct DtypeOf<T> {                                              \
    static constexpr Dtype value = Dtype::D;                                   \
  };                                                                           \
  static_assert(sizeof(T) == dtype_detail::info(Dtype::D).size)
RTCG_DTYPE_OF(std::int8_t, int8);
RTCG_DTYPE_OF(std::int16_t, int16);
RTCG_DTYPE_OF(std::int32_t, int32);
RTCG_DTYPE_OF(std::int64_t, int64);
RTCG_DTYPE_OF(std::uint8_t, uint8);
RTCG_DTYPE_OF(std::uint16_t, uint16);
RTCG_DTYPE_OF(std::uint32_t, uint32);
RTCG_DTYPE_OF(std::uint64_t, uint64);
RTCG_DTYPE_OF(float, float32);
RTCG_DTYPE_OF(double, float64);
#undef RTCG_DTYPE_OF

template <class T> inline constexpr Dtype dtype_of = DtypeOf<std::remove_cv_t<T>>::value;

template <class T>
concept Element = requires { DtypeOf<std::remove_cv_t<T>>::value; };

/// Calls `f(std::type_identity<T>{})` with the C++ element type of `d`.
template <class F> decltype(auto) visit_dtype(Dtype d, F &&f) {
  switch (d) {
  case Dtype::int8: return f(std::type_identity<std::int8_t>{});
  case Dtype::int16: return f(std::type_identity<std::int16_t>{});
  case Dtype::int32: return f(std::type_identity<std::int32_t>{});
  case Dtype::int64: return f(std::type_identity<std::int64_t>{});
  case Dtype::uint8: return f(std::type_identity<std::uint8_t>{});
  case Dtype::uint16: return f(std::type_identity<std::uint16_t>{});
  case Dtype::uint32: return f(std::type_identity<std::uint32_t>{});
  case Dtype::uint64: return f(std::type_identity<std::uint64_t>{});
  case Dtype::float32: return f(std::type_identity<float>{});
  case Dtype::float64: return f(std::type_identity<double>{});
  }
  throw Error("invalid dtype");
}

/// Result dtype of a binary operation on `a` and `b`:
///  - same kind: the wider type;
///  - signed with unsigned: the smallest signed type holding both ranges,
///    float64 when none exists (uint64 with any signed type);
///  - integer with float: the smallest float exactly representing every
///    value of both (so int32 + float32 -> float64, int16 + float32 ->
///    float32). 64-bit integers go to float64 although it cannot hold them
///    all, as in common array packages.
constexpr Dtype promote(Dtype a, Dtype b) {
  if (a == b)
    return a;
  const auto ka = kind(a), kb = kind(b);
  const auto wider = [](Dtype x, Dtype y) { return size_of(x) >= size_of(y) ? x : y; };
  if (ka == kb)
    return wider(a, b);
  if (ka == DtypeKind::floating || kb == DtypeKind::floating) {
    const Dtype f = ka == DtypeKind::floating ? a : b;
    const Dtype i = ka == DtypeKind::floating ? b : a;
    // float32 has a 24-bit significand: exact for integers of up to 16 bits.
    if (f == Dtype::float32 && size_of(i) <= 2)
      return Dtype::float32;
    return Dtype::float64;
  }
  const Dtype s = ka == DtypeKind::signed_int ? a : b;
  const Dtype u = ka == DtypeKind::signed_int ? b : a;
  if (size_of(s) > size_of(u))
    return s;
  switch (size_of(u)) {
  case 1: return Dtype::int16;
  case 2: return Dtype::int32;
  case 4: return Dtype::int64;
  default: return Dtype::float64;
  }
}

/// A typed scalar value, stored in an 8-byte slot (the width scalars are
/// passed with through the kernel argument pack).
class Scalar {
public:
  Scalar() = default;

  template <Element T> Scalar(T v) : dtype_(dtype_of<T>) {
    std::memcpy(slot_.data(), &v, sizeof(T));
  }

  /// `value` converted to `d` with C conversion semantics.
  template <class T>
    requires std::is_arithmetic_v<T>
  static Scalar cast(Dtype d, T value) {
    return visit_dtype(d, [&](auto tag) {
      using U = typename decltype(tag)::type;
      return Scalar(static_cast<U>(value));
    });
  }

  Dtype dtype() const noexcept { return dtype_; }

  /// The value converted to T with C conversion semantics.
  template <class T> T as() const {
    return visit_dtype(dtype_, [&](auto tag) {
      using U = typename decltype(tag)::type;
      U v;
      std::memcpy(&v, slot_.data(), sizeof(U));
      return static_cast<T>(v);
    });
  }

  bool is_zero() const {
    return visit_dtype(dtype_, [&](auto tag) { return as<typename decltype(tag)::type>() == 0; });
  }

  void *slot() noexcept { return slot_.data(); }
  const void *slot() const noexcept { return slot_.data(); }

  std::string to_string() const {
    return visit_dtype(dtype_, [&](auto tag) {
      using U = typename decltype(tag)::type;
      if constexpr (std::is_floating_point_v<U>) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", static_cast<double>(as<U>()));
        return std::string(buf);
      } else {
        return std::to_string(as<U>());
      }
    });
  }

  friend bool operator==(const Scalar &a, const Scalar &b) {
    return a.dtype_ == b.dtype_ &&
           std::memcmp(a.slot_.data(), b.slot_.data(), size_of(a.dtype_)) == 0;
  }

private:
  Dtype dtype_ = Dtype::float64;
  alignas(8) std::array<unsigned char, 8> slot_{};
};

} // namespace rtcg

#endif // RTCG_DTYPE_HPP
