// Copyright 2026 The rtcg-kit Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef RTCG_CONTEXT_HPP
#define RTCG_CONTEXT_HPP

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>

#include "rtcg/detail/fs.hpp"
#include "rtcg/jit.hpp"
#include "rtcg/memory_pool.hpp"

namespace rtcg {

/// Bundles what the kernel generators need: a toolchain, a compile cache,
/// the platform fingerprint and a memory pool. Compiled modules are also
/// memoised in-process by cache key.
class Context {
public:
  Context(jit::ToolchainConfig toolchain, std::filesystem::path cache_root,
          std::shared_ptr<MemoryPool> pool = default_pool())
      : toolchain_(std::move(toolchain)), cache_(std::move(cache_root)),
        fingerprint_(jit::fingerprint(toolchain_)), pool_(std::move(pool)) {}

  /// Toolchain and cache root taken from RTCG_CC / RTCG_CFLAGS /
  /// RTCG_CACHE_DIR, falling back to defaults.
  static std::shared_ptr<Context> from_environment() {
    return std::make_shared<Context>(jit::ToolchainConfig::detect(), detail::default_cache_root());
  }

  static const std::shared_ptr<Context> &default_context() {
    static const auto ctx = from_environment();
    return ctx;
  }

  jit::CompiledModule compile(std::string_view source) {
    const auto key = jit::cache_key(source, toolchain_, fingerprint_);
    {
      std::lock_guard lock(mu_);
      if (auto it = modules_.find(key.digest); it != modules_.end())
        return it->second;
    }
    auto mod = jit::compile(source, toolchain_, cache_, fingerprint_);
    std::lock_guard lock(mu_);
    ++compiles_;
    return modules_.emplace(key.digest, std::move(mod)).first->second;
  }

  /// compile() calls that went past the in-process memo.
  std::size_t compiles() const {
    std::lock_guard lock(mu_);
    return compiles_;
  }

  const jit::ToolchainConfig &toolchain() const noexcept { return toolchain_; }
  jit::CacheStore &cache() noexcept { return cache_; }
  const jit::PlatformFingerprint &fingerprint() const noexcept { return fingerprint_; }
  const std::shared_ptr<MemoryPool> &pool() const noexcept { return pool_; }
  std::filesystem::path tune_root() const { return cache_.root() / "tune"; }

private:
  jit::ToolchainConfig toolchain_;
  jit::CacheStore cache_;
  jit::PlatformFingerprint fingerprint_;
  std::shared_ptr<MemoryPool> pool_;
  mutable std::mutex mu_;
  std::map<std::string, jit::CompiledModule> modules_;
  std::size_t compiles_ = 0;
};

} // namespace rtcg

#endif // RTCG_CONTEXT_HPP
