// Copyright 2026 The rtcg-kit Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef RTCG_JIT_HPP
#define RTCG_JIT_HPP

#include "rtcg/jit/cache.hpp"
#include "rtcg/jit/fingerprint.hpp"
#include "rtcg/jit/module.hpp"
#include "rtcg/jit/toolchain.hpp"

#endif // RTCG_JIT_HPP
