// Copyright 2026 The rtcg-kit Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef RTCG_RTCG_HPP
#define RTCG_RTCG_HPP

#include "rtcg/array_ops.hpp"
#include "rtcg/autotune.hpp"
#include "rtcg/context.hpp"
#include "rtcg/csyntax.hpp"
#include "rtcg/dtype.hpp"
#include "rtcg/elementwise.hpp"
#include "rtcg/error.hpp"
#include "rtcg/jit.hpp"
#include "rtcg/memory_pool.hpp"
#include "rtcg/ndarray.hpp"
#include "rtcg/reduction.hpp"
#include "rtcg/slicing.hpp"
#include "rtcg/version.hpp"

#endif // RTCG_RTCG_HPP
