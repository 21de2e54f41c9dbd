// Copyright 2026 The rtcg-kit Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef RTCG_DETAIL_FS_HPP
#define RTCG_DETAIL_FS_HPP

#include <unistd.h>

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>

#include "rtcg/error.hpp"

namespace rtcg::detail {

namespace fs = std::filesystem;

inline std::string read_file(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  if (!in)
    throw Error("cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const fs::path &p, std::string_view bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out)
    throw Error("cannot create " + p.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out)
    throw Error("write failed: " + p.string());
}

/// A name unique across threads and processes for temporary files.
inline std::string unique_suffix() {
  static std::atomic<unsigned long> counter{0};
  thread_local std::mt19937_64 rng{std::random_device{}()};
  return std::to_string(::getpid()) + "-" + std::to_string(counter++) + "-" +
         std::to_string(rng() & 0xffffffu);
}

/// Writes `bytes` to `p` via a sibling temporary and rename(2).
inline void atomic_write_file(const fs::path &p, std::string_view bytes) {
  fs::create_directories(p.parent_path());
  const auto tmp = p.parent_path() / ("." + p.filename().string() + ".tmp-" + unique_suffix());
  write_file(tmp, bytes);
  std::error_code ec;
  fs::rename(tmp, p, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error("cannot rename into " + p.string());
  }
}

inline std::int64_t unix_now() {
  return std::chrono::duration_cast<std::chrono::seconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

inline std::string getenv_or(const char *name, std::string fallback = {}) {
  const char *v = std::getenv(name);
  return (v && *v) ? std::string(v) : fallback;
}

/// `$RTCG_CACHE_DIR`, else `$XDG_CACHE_HOME/rtcg-kit`, else `~/.cache/rtcg-kit`.
inline fs::path default_cache_root() {
  if (auto env = getenv_or("RTCG_CACHE_DIR"); !env.empty())
    return env;
  if (auto xdg = getenv_or("XDG_CACHE_HOME"); !xdg.empty())
    return fs::path(xdg) / "rtcg-kit";
  if (auto home = getenv_or("HOME"); !home.empty())
    return fs::path(home) / ".cache" / "rtcg-kit";
  return fs::temp_directory_path() / "rtcg-kit";
}

} // namespace rtcg::detail

#endif // RTCG_DETAIL_FS_HPP
