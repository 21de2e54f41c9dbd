// Copyright 2026 The rtcg-kit Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef RTCG_CSYNTAX_HPP
#define RTCG_CSYNTAX_HPP

#include "rtcg/csyntax/ast.hpp"
#include "rtcg/csyntax/template.hpp"
#include "rtcg/csyntax/vector_add.hpp"

#endif // RTCG_CSYNTAX_HPP
