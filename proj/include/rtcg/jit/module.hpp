// Copyright 2026 The rtcg-kit Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef RTCG_JIT_MODULE_HPP
#define RTCG_JIT_MODULE_HPP

#include <dlfcn.h>

#include <atomic>
#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "rtcg/detail/fs.hpp"
#include "rtcg/detail/process.hpp"
#include "rtcg/detail/sha256.hpp"
#include "rtcg/error.hpp"
#include "rtcg/jit/cache.hpp"
#include "rtcg/jit/fingerprint.hpp"
#include "rtcg/jit/toolchain.hpp"

namespace rtcg::jit {

/// Every generated kernel is exported with C linkage as
///   void name(void **args, long start, long end)
/// and processes indices in [start, end).
using KernelFn = void (*)(void **args, long start, long end);

class KernelHandle {
public:
  KernelHandle() = default;
  KernelHandle(KernelFn fn, std::shared_ptr<void> library, std::string name)
      : fn_(fn), library_(std::move(library)), name_(std::move(name)) {}

  /// An empty range returns without calling into the kernel.
  void operator()(void **args, long start, long end) const {
    if (start >= end)
      return;
    fn_(args, start, end);
  }

  KernelFn raw() const noexcept { return fn_; }
  const std::string &name() const noexcept { return name_; }
  explicit operator bool() const noexcept { return fn_ != nullptr; }

private:
  KernelFn fn_ = nullptr;
  std::shared_ptr<void> library_; // keeps the library mapped
  std::string name_;
};

struct Provenance {
  std::string source;
  std::vector<std::string> flags;
  std::string toolchain_id;
  double seconds = 0.0; // wall time of the compile() call that produced this
  bool cache_hit = false;
  std::string compiler_output; // warnings from the original compilation
};

class CompiledModule {
public:
  CompiledModule(CacheKey key, std::filesystem::path library, Provenance provenance,
                 std::shared_ptr<void> handle)
      : key_(std::move(key)), library_(std::move(library)),
        provenance_(std::move(provenance)), handle_(std::move(handle)),
        table_(std::make_shared<Table>()) {}

  const CacheKey &key() const noexcept { return key_; }
  const std::filesystem::path &library_path() const noexcept { return library_; }
  const Provenance &provenance() const noexcept { return provenance_; }
  bool cache_hit() const noexcept { return provenance_.cache_hit; }

  /// Resolves an exported kernel. Throws SymbolNotFound.
  KernelHandle get_kernel(std::string_view name) const {
    std::lock_guard lock(table_->mu);
    auto it = table_->kernels.find(name);
    if (it == table_->kernels.end()) {
      const std::string sym(name);
      ::dlerror();
      void *p = ::dlsym(handle_.get(), sym.c_str());
      if (!p)
        throw SymbolNotFound("kernel '" + sym + "' not found in " + library_.string());
      it = table_->kernels.emplace(sym, reinterpret_cast<KernelFn>(p)).first;
    }
    return {it->second, handle_, it->first};
  }

private:
  struct Table {
    std::mutex mu;
    std::map<std::string, KernelFn, std::less<>> kernels;
  };

  CacheKey key_;
  std::filesystem::path library_;
  Provenance provenance_;
  std::shared_ptr<void> handle_;
  std::shared_ptr<Table> table_;
};

namespace module_detail {

inline std::atomic<std::size_t> &spawn_counter() {
  static std::atomic<std::size_t> n{0};
  return n;
}

// Serialises compiles of one key within this process.
inline std::shared_ptr<std::mutex> key_mutex(const std::string &digest) {
  static std::mutex mu;
  static std::map<std::string, std::weak_ptr<std::mutex>> locks;
  std::lock_guard lock(mu);
  auto &slot = locks[digest];
  auto m = slot.lock();
  if (!m) {
    m = std::make_shared<std::mutex>();
    slot = m;
  }
  return m;
}

inline std::shared_ptr<void> load_library(const std::filesystem::path &p) {
  ::dlerror();
  void *h = ::dlopen(p.c_str(), RTLD_NOW | RTLD_LOCAL);
  if (!h) {
    const char *err = ::dlerror();
    throw LoadError("cannot load " + p.string() + ": " + (err ? err : "unknown error"));
  }
  return {h, [](void *handle) { ::dlclose(handle); }};
}

inline nlohmann::json make_meta(const CacheKey &key, std::string_view source,
                                const ToolchainConfig &config, const PlatformFingerprint &fp,
                                std::string_view binary) {
  return {{"schema", kMetaSchemaVersion},
          {"key", key.digest},
          {"source_digest", detail::sha256_hex(source)},
          {"flags", config.flags},
          {"toolchain_id", config.identity},
          {"fingerprint", fp.to_json()},
          {"binary_digest", detail::sha256_hex(binary)},
          {"created_unix", detail::unix_now()}};
}

} // namespace module_detail

/// Source text with 1-based line numbers prepended, as shown in CompileError.
inline std::string number_lines(std::string_view source) {
  std::string out;
  std::size_t line = 1, pos = 0;
  while (pos < source.size()) {
    auto nl = source.find('\n', pos);
    if (nl == std::string_view::npos)
      nl = source.size();
    auto num = std::to_string(line++);
    out.append(num.size() < 4 ? 4 - num.size() : 0, ' ');
    out += num;
    out += ": ";
    out.append(source.substr(pos, nl - pos));
    out += '\n';
    pos = nl + 1;
  }
  return out;
}

/// Number of compiler processes spawned for compilation by this process.
inline std::size_t compiler_invocations() { return module_detail::spawn_counter().load(); }

/// Compiles C source into a loaded shared library, going through the cache:
/// a valid entry for the key is loaded without spawning the compiler;
/// otherwise the source is compiled in a staging directory and published
/// atomically before loading.
inline CompiledModule compile(std::string_view source, const ToolchainConfig &config,
                              CacheStore &cache, const PlatformFingerprint &fp) {
  using clock = std::chrono::steady_clock;
  namespace fs = std::filesystem;
  const auto t0 = clock::now();
  if (source.empty())
    throw JitError("compile: empty source");

  const auto key = cache_key(source, config, fp);
  const auto guard = module_detail::key_mutex(key.digest);
  std::lock_guard lock(*guard);

  Provenance prov{std::string(source), config.flags, config.identity, 0.0, false, {}};
  auto finish = [&](const CacheEntry &entry, bool hit) {
    prov.cache_hit = hit;
    std::error_code ec;
    if (fs::exists(entry.log(), ec))
      prov.compiler_output = detail::read_file(entry.log());
    auto handle = module_detail::load_library(entry.binary());
    prov.seconds = std::chrono::duration<double>(clock::now() - t0).count();
    return CompiledModule(key, entry.binary(), std::move(prov), std::move(handle));
  };

  if (auto hit = cache.lookup(key))
    return finish(*hit, true);

  const auto staging = cache.make_staging_dir(key);
  struct Cleanup {
    fs::path dir;
    ~Cleanup() {
      std::error_code ec;
      fs::remove_all(dir, ec);
    }
  } cleanup{staging};

  detail::write_file(staging / "source.c", source);
  std::vector<std::string> argv{config.compiler.string()};
  argv.insert(argv.end(), config.flags.begin(), config.flags.end());
  for (const char *a : {"-shared", "-fPIC", "-o"})
    argv.emplace_back(a);
  argv.push_back((staging / "module.bin").string());
  argv.push_back((staging / "source.c").string());

  ++module_detail::spawn_counter();
  const auto r = detail::run_process(argv, config.timeout);
  if (r.timed_out || r.exit_code != 0)
    throw CompileError(r.err + r.out, number_lines(source), r.exit_code, r.timed_out);

  const auto binary = detail::read_file(staging / "module.bin");
  detail::write_file(staging / "compile.log", r.err + r.out);
  detail::write_file(staging / "meta.json",
                     module_detail::make_meta(key, source, config, fp, binary).dump(2));

  if (!cache.publish(key, staging)) {
    // Another process won the race; its entry is equivalent.
    if (auto hit = cache.lookup(key))
      return finish(*hit, false);
    throw JitError("cache entry vanished after concurrent publish: " + key.digest);
  }
  return finish(cache.validate(key), false);
}

inline CompiledModule compile(std::string_view source, const ToolchainConfig &config,
                              CacheStore &cache) {
  return compile(source, config, cache, fingerprint(config));
}

} // namespace rtcg::jit

#endif // RTCG_JIT_MODULE_HPP
