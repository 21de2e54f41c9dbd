// Copyright 2026 The rtcg-kit Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef RTCG_VERSION_HPP
#define RTCG_VERSION_HPP

#include <string_view>

namespace rtcg {

inline constexpr std::string_view kToolkitVersion = "0.1.0";

} // namespace rtcg

#endif // RTCG_VERSION_HPP
