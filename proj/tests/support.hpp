// Copyright 2026 The rtcg-kit Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef RTCG_TESTS_SUPPORT_HPP
#define RTCG_TESTS_SUPPORT_HPP

#include <cstdlib>
#include <filesystem>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "rtcg/rtcg.hpp"

namespace rtcg::testing {

/// A fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
  explicit TempDir(const std::string &tag = "rtcg-test") {
    auto tmpl = (std::filesystem::temp_directory_path() / (tag + ".XXXXXX")).string();
    if (!::mkdtemp(tmpl.data()))
      throw std::runtime_error("mkdtemp failed");
    path_ = tmpl;
  }
  TempDir(const TempDir &) = delete;
  TempDir &operator=(const TempDir &) = delete;
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path &path() const noexcept { return path_; }

private:
  std::filesystem::path path_;
};

inline std::shared_ptr<Context> make_context(const std::filesystem::path &cache_root,
                                             std::shared_ptr<MemoryPool> pool = nullptr) {
  return std::make_shared<Context>(jit::ToolchainConfig::detect("cc"), cache_root,
                                   pool ? std::move(pool) : std::make_shared<MemoryPool>());
}

/// A context with its own temporary cache, for tests that do not care where
/// modules live.
struct Sandbox {
  TempDir dir{"rtcg-sandbox"};
  std::shared_ptr<Context> ctx = make_context(dir.path());
};

/// Uniform values of T: the full range for integers, [-lo, hi] for floats.
template <Element T>
std::vector<T> random_values(std::size_t n, std::uint64_t seed, double lo = -100.0,
                             double hi = 100.0) {
  std::mt19937_64 rng(seed);
  std::vector<T> out(n);
  if constexpr (std::is_floating_point_v<T>) {
    std::uniform_real_distribution<T> d(static_cast<T>(lo), static_cast<T>(hi));
    for (auto &v : out)
      v = d(rng);
  } else {
    using W = std::conditional_t<std::is_signed_v<T>, std::int64_t, std::uint64_t>;
    std::uniform_int_distribution<W> d(std::numeric_limits<T>::lowest(),
                                       std::numeric_limits<T>::max());
    for (auto &v : out)
      v = static_cast<T>(d(rng));
  }
  return out;
}

/// A wrapper compiler script that appends one line to `log` per compile and
/// then runs the real `cc`. Version queries are answered without logging,
/// with `version_line` if given.
inline std::string logging_compiler_script(const std::filesystem::path &log,
                                           const std::string &version_line = "") {
  std::string s = "#!/bin/sh\nif [ \"$1\" = \"--version\" ]; then\n";
  s += version_line.empty() ? "  exec cc --version\n" : "  echo '" + version_line + "'\n  exit 0\n";
  s += "fi\necho \"$@\" >> '" + log.string() + "'\nexec cc \"$@\"\n";
  return s;
}

inline std::filesystem::path write_executable(const std::filesystem::path &p,
                                              const std::string &text) {
  detail::write_file(p, text);
  std::filesystem::permissions(p, std::filesystem::perms::owner_all);
  return p;
}

inline std::size_t count_lines(const std::filesystem::path &p) {
  std::error_code ec;
  if (!std::filesystem::exists(p, ec))
    return 0;
  const auto text = detail::read_file(p);
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

} // namespace rtcg::testing

#endif // RTCG_TESTS_SUPPORT_HPP
