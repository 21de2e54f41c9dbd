// Copyright 2026 The rtcg-kit Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef RTCG_DETAIL_SHA256_HPP
#define RTCG_DETAIL_SHA256_HPP

#include <openssl/evp.h>

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>

#include "rtcg/error.hpp"

namespace rtcg::detail {

/// Incremental SHA-256 backed by OpenSSL's EVP interface.
class Sha256 {
public:
  Sha256() : ctx_(EVP_MD_CTX_new(), &EVP_MD_CTX_free) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1)
      throw Error("sha256: digest initialisation failed");
  }

  Sha256 &update(std::string_view bytes) {
    if (EVP_DigestUpdate(ctx_.get(), bytes.data(), bytes.size()) != 1)
      throw Error("sha256: update failed");
    return *this;
  }

  // Length-prefixed field, so that ("ab","c") and ("a","bc") hash differently.
  Sha256 &field(std::string_view bytes) {
    const auto n = static_cast<std::uint64_t>(bytes.size());
    std::array<char, 8> len{};
    for (int k = 0; k < 8; ++k)
      len[k] = static_cast<char>((n >> (8 * k)) & 0xffu);
    update({len.data(), len.size()});
    return update(bytes);
  }

  std::string hex() {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(ctx_.get(), md.data(), &len) != 1)
      throw Error("sha256: finalisation failed");
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int k = 0; k < len; ++k) {
      out += digits[md[k] >> 4];
      out += digits[md[k] & 0xf];
    }
    return out;
  }

private:
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_;
};

inline std::string sha256_hex(std::string_view bytes) { return Sha256().update(bytes).hex(); }

} // namespace rtcg::detail

#endif // RTCG_DETAIL_SHA256_HPP
