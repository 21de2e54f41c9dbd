// Copyright 2026 The rtcg-kit Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef RTCG_JIT_FINGERPRINT_HPP
#define RTCG_JIT_FINGERPRINT_HPP

#include <sys/utsname.h>

#include <fstream>
#include <string>
#include <thread>

#include <nlohmann/json.hpp>

#include "rtcg/detail/sha256.hpp"
#include "rtcg/jit/toolchain.hpp"
#include "rtcg/version.hpp"

namespace rtcg::jit {

/// Identifies the hardware/software environment that generated code was
/// built and tuned on. Unknown fields hold "unknown".
struct PlatformFingerprint {
  std::string os;
  std::string cpu_model;
  int logical_cores = 0;
  std::string toolchain_id;
  std::string toolkit_version;

  nlohmann::json to_json() const {
    return {{"os", os},
            {"cpu_model", cpu_model},
            {"logical_cores", logical_cores},
            {"toolchain_id", toolchain_id},
            {"toolkit_version", toolkit_version}};
  }

  static PlatformFingerprint from_json(const nlohmann::json &j) {
    PlatformFingerprint fp;
    fp.os = j.at("os").get<std::string>();
    fp.cpu_model = j.at("cpu_model").get<std::string>();
    fp.logical_cores = j.at("logical_cores").get<int>();
    fp.toolchain_id = j.at("toolchain_id").get<std::string>();
    fp.toolkit_version = j.at("toolkit_version").get<std::string>();
    return fp;
  }

  /// Canonical text: compact JSON with sorted keys.
  std::string canonical() const { return to_json().dump(); }
  static PlatformFingerprint parse(const std::string &text) {
    return from_json(nlohmann::json::parse(text));
  }
  std::string digest() const { return detail::sha256_hex(canonical()); }

  friend bool operator==(const PlatformFingerprint &, const PlatformFingerprint &) = default;
};

namespace fingerprint_detail {

struct HostInfo {
  std::string os = "unknown";
  std::string cpu_model = "unknown";
  int logical_cores = 0;
};

inline HostInfo probe_host() {
  HostInfo h;
  if (utsname u{}; ::uname(&u) == 0)
    h.os = std::string(u.sysname) + " " + u.release + " " + u.machine;
  std::ifstream cpuinfo("/proc/cpuinfo");
  for (std::string line; std::getline(cpuinfo, line);) {
    if (line.rfind("model name", 0) == 0) {
      if (auto colon = line.find(':'); colon != std::string::npos) {
        auto v = line.substr(colon + 1);
        v.erase(0, v.find_first_not_of(" \t"));
        if (!v.empty())
          h.cpu_model = v;
      }
      break;
    }
  }
  h.logical_cores = static_cast<int>(std::thread::hardware_concurrency());
  return h;
}

inline const HostInfo &host() {
  static const HostInfo h = probe_host();
  return h;
}

} // namespace fingerprint_detail

inline PlatformFingerprint fingerprint(const ToolchainConfig &config) {
  const auto &h = fingerprint_detail::host();
  return {h.os, h.cpu_model, h.logical_cores,
          config.identity.empty() ? "unknown" : config.identity, std::string(kToolkitVersion)};
}

} // namespace rtcg::jit

#endif // RTCG_JIT_FINGERPRINT_HPP
