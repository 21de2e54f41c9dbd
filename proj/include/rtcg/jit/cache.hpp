// Copyright 2026 The rtcg-kit Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef RTCG_JIT_CACHE_HPP
#define RTCG_JIT_CACHE_HPP

// On-disk compile cache. Layout:
//
//   <root>/<first 2 hex of key>/<key>/source.c
//                                     module.bin
//                                     meta.json
//                                     compile.log
//   <root>/quarantine/   entries that failed validation
//   <root>/tmp/          staging directories and trash
//
// Entries are staged in tmp/ and published with a single rename(2) of the
// directory; a concurrent writer that loses the race discards its copy.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <nlohmann/json.hpp>

#include "rtcg/detail/fs.hpp"
#include "rtcg/detail/sha256.hpp"
#include "rtcg/error.hpp"
#include "rtcg/jit/fingerprint.hpp"
#include "rtcg/jit/toolchain.hpp"

namespace rtcg::jit {

inline constexpr int kKeySchemaVersion = 1;
inline constexpr int kMetaSchemaVersion = 1;

struct CacheKey {
  std::string digest; // 64 hex chars

  friend bool operator==(const CacheKey &, const CacheKey &) = default;
};

/// SHA-256 over a length-prefixed encoding of every input that affects the
/// produced binary.
inline CacheKey cache_key(std::string_view source, const ToolchainConfig &config,
                          const PlatformFingerprint &fp) {
  detail::Sha256 h;
  h.field("rtcg-cache-key").field(std::to_string(kKeySchemaVersion));
  h.field(source);
  h.field(std::to_string(config.flags.size()));
  for (const auto &f : config.flags)
    h.field(f);
  h.field(config.identity);
  h.field(fp.canonical());
  return {h.hex()};
}

struct CacheEntry {
  std::filesystem::path dir;
  nlohmann::json meta;

  std::filesystem::path binary() const { return dir / "module.bin"; }
  std::filesystem::path source() const { return dir / "source.c"; }
  std::filesystem::path log() const { return dir / "compile.log"; }
};

struct CacheStats {
  std::size_t entries = 0;
  std::uintmax_t bytes = 0;
  std::optional<std::int64_t> oldest_unix;
  std::optional<std::int64_t> newest_unix;
};

class CacheStore {
public:
  explicit CacheStore(std::filesystem::path root = detail::default_cache_root())
      : root_(std::move(root)) {}

  const std::filesystem::path &root() const noexcept { return root_; }

  std::filesystem::path entry_dir(const CacheKey &key) const {
    return root_ / key.digest.substr(0, 2) / key.digest;
  }

  /// Checks an entry's metadata against its files. Throws CacheCorrupt.
  CacheEntry validate(const CacheKey &key) const {
    CacheEntry e{entry_dir(key), {}};
    try {
      e.meta = nlohmann::json::parse(detail::read_file(e.dir / "meta.json"));
    } catch (const std::exception &ex) {
      throw CacheCorrupt("unreadable meta.json in " + e.dir.string() + ": " + ex.what());
    }
    auto field = [&](const char *name) -> const nlohmann::json & {
      if (!e.meta.contains(name))
        throw CacheCorrupt("meta.json lacks '" + std::string(name) + "' in " + e.dir.string());
      return e.meta.at(name);
    };
    try {
      if (field("schema").get<int>() != kMetaSchemaVersion)
        throw CacheCorrupt("unsupported meta schema in " + e.dir.string());
      if (field("key").get<std::string>() != key.digest)
        throw CacheCorrupt("key mismatch in " + e.dir.string());
      const auto bin = detail::read_file(e.binary());
      if (field("binary_digest").get<std::string>() != detail::sha256_hex(bin))
        throw CacheCorrupt("binary digest mismatch in " + e.dir.string());
      const auto src = detail::read_file(e.source());
      if (field("source_digest").get<std::string>() != detail::sha256_hex(src))
        throw CacheCorrupt("source digest mismatch in " + e.dir.string());
    } catch (const CacheCorrupt &) {
      throw;
    } catch (const std::exception &ex) {
      throw CacheCorrupt("invalid entry " + e.dir.string() + ": " + ex.what());
    }
    return e;
  }

  /// A validated entry, or nullopt. Entries failing validation are moved to
  /// quarantine/ and reported as a miss.
  std::optional<CacheEntry> lookup(const CacheKey &key) {
    namespace fs = std::filesystem;
    std::error_code ec;
    if (!fs::exists(entry_dir(key) / "meta.json", ec) && !fs::exists(entry_dir(key), ec))
      return std::nullopt;
    try {
      return validate(key);
    } catch (const CacheCorrupt &) {
      quarantine(key);
      return std::nullopt;
    }
  }

  /// Publishes a staged directory as the entry for `key`. Returns false if
  /// another writer published first (the staged copy is then removed).
  bool publish(const CacheKey &key, const std::filesystem::path &staged) {
    namespace fs = std::filesystem;
    const auto dest = entry_dir(key);
    fs::create_directories(dest.parent_path());
    std::error_code ec;
    fs::rename(staged, dest, ec);
    if (!ec)
      return true;
    fs::remove_all(staged, ec);
    return false;
  }

  /// A fresh, private staging directory under tmp/.
  std::filesystem::path make_staging_dir(const CacheKey &key) const {
    const auto dir = root_ / "tmp" / (key.digest.substr(0, 16) + "." + detail::unique_suffix());
    std::filesystem::create_directories(dir);
    return dir;
  }

  void quarantine(const CacheKey &key) {
    namespace fs = std::filesystem;
    std::error_code ec;
    const auto q = root_ / "quarantine";
    fs::create_directories(q, ec);
    fs::rename(entry_dir(key), q / (key.digest + "." + detail::unique_suffix()), ec);
    if (ec)
      fs::remove_all(entry_dir(key), ec);
    ++quarantined_;
  }

  std::size_t quarantined() const noexcept { return quarantined_.load(); }

  CacheStats stats() const {
    CacheStats s;
    for_each_entry([&](const std::filesystem::path &dir) {
      ++s.entries;
      std::error_code ec;
      for (const auto &f : std::filesystem::directory_iterator(dir, ec))
        if (f.is_regular_file(ec))
          s.bytes += f.file_size(ec);
      const auto t = created_unix(dir);
      s.oldest_unix = s.oldest_unix ? std::min(*s.oldest_unix, t) : t;
      s.newest_unix = s.newest_unix ? std::max(*s.newest_unix, t) : t;
    });
    return s;
  }

  /// Removes every entry, the tune store and the quarantine.
  /// Each directory is renamed out of the tree before it is deleted, so
  /// readers never observe a half-removed entry. Returns entries removed.
  std::size_t clear() {
    namespace fs = std::filesystem;
    std::size_t removed = stats().entries;
    std::error_code ec;
    if (!fs::exists(root_, ec))
      return 0;
    std::vector<fs::path> tops;
    for (const auto &d : fs::directory_iterator(root_, ec))
      if (d.path().filename() != "tmp")
        tops.push_back(d.path());
    for (const auto &t : tops)
      discard(t);
    return removed;
  }

  /// Removes entries created at least `age` ago. Returns entries removed.
  std::size_t prune(std::chrono::seconds age) {
    const auto cutoff = detail::unix_now() - age.count();
    std::vector<std::filesystem::path> victims;
    for_each_entry([&](const std::filesystem::path &dir) {
      if (created_unix(dir) <= cutoff)
        victims.push_back(dir);
    });
    for (const auto &v : victims)
      discard(v);
    return victims.size();
  }

private:
  template <class F> void for_each_entry(F &&f) const {
    namespace fs = std::filesystem;
    std::error_code ec;
    if (!fs::is_directory(root_, ec))
      return;
    std::vector<fs::path> dirs;
    for (const auto &fan : fs::directory_iterator(root_, ec)) {
      const auto name = fan.path().filename().string();
      if (name.size() != 2 || !fan.is_directory(ec))
        continue;
      for (const auto &entry : fs::directory_iterator(fan.path(), ec))
        if (entry.is_directory(ec))
          dirs.push_back(entry.path());
    }
    std::sort(dirs.begin(), dirs.end());
    for (const auto &d : dirs)
      f(d);
  }

  static std::int64_t created_unix(const std::filesystem::path &dir) {
    try {
      return nlohmann::json::parse(detail::read_file(dir / "meta.json"))
          .at("created_unix")
          .get<std::int64_t>();
    } catch (const std::exception &) {
      std::error_code ec;
      const auto t = std::filesystem::last_write_time(dir, ec);
      if (ec)
        return 0;
      return std::chrono::duration_cast<std::chrono::seconds>(
                 std::chrono::file_clock::to_sys(t).time_since_epoch())
          .count();
    }
  }

  void discard(const std::filesystem::path &p) {
    namespace fs = std::filesystem;
    std::error_code ec;
    const auto trash = root_ / "tmp" / ("trash." + detail::unique_suffix());
    fs::create_directories(trash.parent_path(), ec);
    fs::rename(p, trash, ec);
    fs::remove_all(ec ? p : trash, ec);
  }

  std::filesystem::path root_;
  std::atomic<std::size_t> quarantined_{0};
};

} // namespace rtcg::jit

#endif // RTCG_JIT_CACHE_HPP
