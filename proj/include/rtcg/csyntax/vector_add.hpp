// Copyright 2026 The rtcg-kit Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef RTCG_CSYNTAX_VECTOR_ADD_HPP
#define RTCG_CSYNTAX_VECTOR_ADD_HPP

// The same partially unrolled vector addition `z = x + y`, generated once with
// the template engine and once by building a syntax tree. Both produce a
// kernel with the toolkit ABI
//
//   void name(void **args, long start, long end)
//
// with args = {x, y, z}: an unrolled main loop followed by a scalar tail loop.

#include <cstdint>
#include <string>

#include "rtcg/csyntax/ast.hpp"
#include "rtcg/csyntax/template.hpp"

namespace rtcg::csyntax {

inline constexpr std::string_view kUnrolledAddTemplate =
    R"(void ${name}(void **args, long start, long end)
{
    const ${type} *x = (const ${type} *)args[0];
    const ${type} *y = (const ${type} *)args[1];
    ${type} *z = (${type} *)args[2];
    long i = start;
    for (; i + ${unroll} <= end; i += ${unroll}) {
{% for k in 0..unroll %}        z[i{% if k %} + ${k}{% endif %}] = x[i{% if k %} + ${k}{% endif %}] + y[i{% if k %} + ${k}{% endif %}];
{% endfor %}    }
    for (; i < end; ++i) {
        z[i] = x[i] + y[i];
    }
}
)";

inline std::string render_unrolled_add(const std::string &ctype, std::int64_t unroll,
                                       const std::string &name = "vector_add") {
  return render(kUnrolledAddTemplate,
                {{"name", name}, {"type", ctype}, {"unroll", unroll}});
}

inline Node build_unrolled_add(const std::string &ctype, std::int64_t unroll,
                               const std::string &name = "vector_add") {
  using namespace ast;
  const CType elem{ctype};
  auto arg = [&](std::int64_t k, CType t) {
    return decl(t, k == 2 ? "z" : (k == 0 ? "x" : "y"),
                raw("(" + t.declare("") + ")args[" + std::to_string(k) + "]"));
  };
  auto at = [](const char *v, std::int64_t k) {
    return k == 0 ? index(id(v), id("i")) : index(id(v), binary("+", id("i"), lit(k)));
  };

  std::vector<Node> unrolled;
  for (std::int64_t k = 0; k < unroll; ++k)
    unrolled.push_back(assign(at("z", k), binary("+", at("x", k), at("y", k))));

  std::vector<Node> body;
  body.push_back(arg(0, elem.as_const().pointer()));
  body.push_back(arg(1, elem.as_const().pointer()));
  body.push_back(arg(2, elem.pointer()));
  body.push_back(decl(CType{"long"}, "i", id("start")));
  body.push_back(for_loop(raw(""), binary("<=", binary("+", id("i"), lit(unroll)), id("end")),
                          assign(id("i"), lit(unroll), "+="), block(std::move(unrolled))));
  body.push_back(for_loop(raw(""), binary("<", id("i"), id("end")), raw("++i"),
                          block({assign(at("z", 0), binary("+", at("x", 0), at("y", 0)))})));

  return translation_unit({function(CType{"void"}, name,
                                    {param(CType{"void", 2}, "args"),
                                     param(CType{"long"}, "start"),
                                     param(CType{"long"}, "end")},
                                    block(std::move(body)))});
}

} // namespace rtcg::csyntax

#endif // RTCG_CSYNTAX_VECTOR_ADD_HPP
