// Copyright 2026 The rtcg-kit Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef RTCG_JIT_TOOLCHAIN_HPP
#define RTCG_JIT_TOOLCHAIN_HPP

#include <sys/stat.h>

#include <atomic>
#include <chrono>
#include <filesystem>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "rtcg/detail/fs.hpp"
#include "rtcg/detail/process.hpp"
#include "rtcg/error.hpp"

namespace rtcg::jit {

/// Flags every kernel is compiled with unless overridden. Contraction is off
/// so generated float code evaluates exactly like a host reference loop, and
/// wrapping signed arithmetic keeps integer kernels free of overflow UB.
inline std::vector<std::string> default_flags() {
  return {"-O2", "-std=c99", "-Wall", "-ffp-contract=off", "-fwrapv"};
}

inline std::vector<std::string> split_flags(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream in{std::string(text)};
  for (std::string f; in >> f;)
    out.push_back(f);
  return out;
}

/// Resolves a compiler name against PATH. Names containing '/' are taken as
/// paths. Throws ToolchainError if nothing executable is found.
inline std::filesystem::path resolve_executable(const std::string &name) {
  namespace fs = std::filesystem;
  if (name.find('/') != std::string::npos) {
    if (::access(name.c_str(), X_OK) != 0)
      throw ToolchainError("compiler not executable: " + name);
    return fs::absolute(name);
  }
  std::istringstream path(detail::getenv_or("PATH", "/usr/bin:/bin"));
  for (std::string dir; std::getline(path, dir, ':');) {
    if (dir.empty())
      continue;
    const auto candidate = fs::path(dir) / name;
    if (::access(candidate.c_str(), X_OK) == 0)
      return candidate;
  }
  throw ToolchainError("compiler not found on PATH: " + name);
}

namespace toolchain_detail {

struct ExecutableStamp {
  std::string path;
  std::intmax_t size = -1;
  std::int64_t mtime_ns = -1;
  auto tie() const { return std::tie(path, size, mtime_ns); }
  bool operator<(const ExecutableStamp &o) const { return tie() < o.tie(); }
};

inline ExecutableStamp stamp(const std::filesystem::path &p) {
  struct stat st {};
  ExecutableStamp s{p.string()};
  // stat follows symlinks, so an upgrade behind /usr/bin/cc is noticed.
  if (::stat(p.c_str(), &st) == 0) {
    s.size = st.st_size;
    s.mtime_ns = static_cast<std::int64_t>(st.st_mtim.tv_sec) * 1'000'000'000 +
                 st.st_mtim.tv_nsec;
  }
  return s;
}

inline std::atomic<std::size_t> &query_counter() {
  static std::atomic<std::size_t> n{0};
  return n;
}

} // namespace toolchain_detail

/// Number of `--version` queries spawned by this process.
inline std::size_t toolchain_queries() { return toolchain_detail::query_counter().load(); }

/// The compiler's identity: its resolved path and the first line it prints
/// for `--version`.
/// Memoized in-process only while the executable's path, size and mtime
/// stay unchanged.
inline std::string query_toolchain_identity(const std::filesystem::path &compiler) {
  using namespace toolchain_detail;
  static std::mutex mu;
  static std::map<ExecutableStamp, std::string> memo;
  const auto key = stamp(compiler);
  {
    std::lock_guard lock(mu);
    if (auto it = memo.find(key); it != memo.end())
      return it->second;
  }
  ++query_counter();
  const auto r = detail::run_process({compiler.string(), "--version"}, std::chrono::seconds(30));
  if (r.exit_code != 0 || r.timed_out)
    throw ToolchainError("'" + compiler.string() + " --version' failed: " + r.err);
  auto first = r.out.substr(0, r.out.find('\n'));
  while (!first.empty() && (first.back() == '\r' || first.back() == ' '))
    first.pop_back();
  if (first.empty())
    first = "unknown";
  first = compiler.string() + ": " + first;
  std::lock_guard lock(mu);
  memo.emplace(key, first);
  return first;
}

struct ToolchainConfig {
  std::filesystem::path compiler;
  std::vector<std::string> flags;
  std::string identity;
  std::chrono::milliseconds timeout{std::chrono::seconds(60)};

  /// Compiler from `name`, else `$RTCG_CC`, else `cc`; flags are the
  /// defaults followed by `$RTCG_CFLAGS`.
  static ToolchainConfig detect(std::string name = {}) {
    if (name.empty())
      name = detail::getenv_or("RTCG_CC", "cc");
    ToolchainConfig cfg;
    cfg.compiler = resolve_executable(name);
    cfg.flags = default_flags();
    for (auto &f : split_flags(detail::getenv_or("RTCG_CFLAGS")))
      cfg.flags.push_back(std::move(f));
    cfg.identity = query_toolchain_identity(cfg.compiler);
    return cfg;
  }
};

} // namespace rtcg::jit

#endif // RTCG_JIT_TOOLCHAIN_HPP
