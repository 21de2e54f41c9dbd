// Copyright 2026 The rtcg-kit Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef RTCG_REDUCTION_HPP
#define RTCG_REDUCTION_HPP

// Map-then-reduce kernels. Each worker folds map_expr over its ranges into
// one partial, starting from the neutral element; a second generated kernel
// folds the partials in ascending worker order.
//
//   ReductionSpec dot{Dtype::float64, "0", "a + b", "x[i] * y[i]",
//                     parse_signature("double *x, double *y"), "dot"};
//   Scalar r = make_reduction(dot)({x, y}, n);

#include <cstdint>
#include <cstring>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "rtcg/elementwise.hpp"

namespace rtcg {

struct ReductionSpec {
  Dtype out = Dtype::float64;
  std::string neutral = "0";     // C expression of the identity element
  std::string reduce_expr = "a + b"; // combiner over `a` and `b`
  std::string map_expr;          // over parameters and `i`; empty: the single vector's element
  KernelSignature signature;
  std::string name = "reduce";
};

struct ReductionOptions : ElementwiseOptions {
#ifdef NDEBUG
  bool check_neutral = false;
#else
  bool check_neutral = true;
#endif
};

namespace reduction_detail {

inline std::string map_expression(const ReductionSpec &spec) {
  if (!spec.map_expr.empty())
    return spec.map_expr;
  const KernelParam *vec = nullptr;
  for (const auto &p : spec.signature.params) {
    if (p.kind != ParamKind::vector)
      continue;
    if (vec)
      throw ParseError("reduction '" + spec.name +
                       "' has several vector parameters and needs an explicit map expression");
    vec = &p;
  }
  if (!vec)
    throw ParseError("reduction '" + spec.name + "' has no vector parameter");
  return vec->name + "[i]";
}

inline csyntax::Node combiner(const ReductionSpec &spec) {
  using namespace csyntax::ast;
  const csyntax::CType t{std::string(c_name(spec.out))};
  return function(csyntax::CType{"static " + t.base}, "rtcg_reduce",
                  {param(t, "a"), param(t, "b")},
                  block({raw("return (" + spec.reduce_expr + ");")}));
}

inline std::string ptr_cast(const csyntax::CType &t, std::size_t slot) {
  return "(" + t.pointer().declare("") + ")args[" + std::to_string(slot) + "]";
}

} // namespace reduction_detail

/// Source holding the stage-1 kernel `name` and the stage-2 kernel
/// `name_combine`. Stage 1 takes the signature's arguments followed by an
/// accumulator slot and a resume flag (0: start from neutral). Stage 2 takes
/// {partials, count, result}.
inline std::string generate_reduction_source(const ReductionSpec &spec, const VariantParams &v) {
  using namespace csyntax::ast;
  using namespace codegen_detail;
  check_kernel_name(spec.name);
  v.validate();
  const csyntax::CType t{std::string(c_name(spec.out))};
  const csyntax::CType clong{"long", 0, true};
  const auto nparams = spec.signature.params.size();
  const auto map = reduction_detail::map_expression(spec);

  auto body = unpack_args(spec.signature);
  body.push_back(decl(t.pointer(), "rtcg_acc_out", raw(reduction_detail::ptr_cast(t, nparams))));
  body.push_back(decl(clong, "rtcg_resume",
                      raw("*" + reduction_detail::ptr_cast(clong, nparams + 1))));
  body.push_back(decl(t, "rtcg_acc", raw("rtcg_resume ? *rtcg_acc_out : (" + spec.neutral + ")")));
  for (auto &s : index_loops(v.unroll, [&] {
         return std::vector<csyntax::Node>{raw("rtcg_acc = rtcg_reduce(rtcg_acc, (" + map + "));")};
       }))
    body.push_back(std::move(s));
  body.push_back(assign(raw("*rtcg_acc_out"), id("rtcg_acc")));

  std::vector<csyntax::Node> combine{
      decl(t.as_const().pointer(), "rtcg_partials", raw(reduction_detail::ptr_cast(t.as_const(), 0))),
      decl(clong, "rtcg_count", raw("*" + reduction_detail::ptr_cast(clong, 1))),
      decl(t.pointer(), "rtcg_out", raw(reduction_detail::ptr_cast(t, 2))),
      decl(t, "rtcg_acc", raw(spec.neutral)),
      for_range("rtcg_k", lit(std::int64_t{0}), id("rtcg_count"),
                block({assign(id("rtcg_acc"),
                              call("rtcg_reduce", {id("rtcg_acc"),
                                                   index(id("rtcg_partials"), id("rtcg_k"))}))})),
      assign(raw("*rtcg_out"), id("rtcg_acc")),
  };

  return csyntax::emit(translation_unit({prelude(), reduction_detail::combiner(spec),
                                         kernel_function(spec.name, std::move(body)),
                                         kernel_function(spec.name + "_combine", std::move(combine))}));
}

namespace reduction_detail {

/// Sample values of `d` to test the neutral element against.
inline std::vector<Scalar> neutral_samples(Dtype d) {
  std::vector<Scalar> out;
  for (double v : {0.0, 1.0, -1.0, 2.0, -2.0, 7.0, 100.0, 0.5, -3.25, 1e10})
    out.push_back(Scalar::cast(d, v));
  visit_dtype(d, [&](auto tag) {
    using T = typename decltype(tag)::type;
    out.push_back(Scalar(std::numeric_limits<T>::max()));
    out.push_back(Scalar(std::numeric_limits<T>::lowest()));
  });
  return out;
}

} // namespace reduction_detail

/// Checks reduce(neutral, s) == s == reduce(s, neutral) on sample values of
/// the out dtype by compiling and running a small probe kernel.
inline bool verify_neutral(const ReductionSpec &spec, Context &ctx) {
  using namespace csyntax::ast;
  const csyntax::CType t{std::string(c_name(spec.out))};
  const auto name = "rtcg_neutral_probe";
  std::vector<csyntax::Node> body{
      decl(t.as_const().pointer(), "rtcg_samples", raw(reduction_detail::ptr_cast(t.as_const(), 0))),
      decl(csyntax::CType{"long", 1}, "rtcg_bad", raw("(long *)args[1]")),
      for_range("i", id("start"), id("end"),
                block({decl(t.as_const(), "rtcg_s", index(id("rtcg_samples"), id("i"))),
                       if_(raw("rtcg_reduce((" + spec.neutral + "), rtcg_s) != rtcg_s || "
                               "rtcg_reduce(rtcg_s, (" + spec.neutral + ")) != rtcg_s"),
                           block({raw("*rtcg_bad += 1;")}))})),
  };
  const auto source = csyntax::emit(translation_unit(
      {codegen_detail::prelude(), reduction_detail::combiner(spec),
       codegen_detail::kernel_function(name, std::move(body))}));
  const auto kernel = ctx.compile(source).get_kernel(name);

  const auto samples = reduction_detail::neutral_samples(spec.out);
  std::vector<unsigned char> packed(samples.size() * size_of(spec.out));
  for (std::size_t k = 0; k < samples.size(); ++k)
    std::memcpy(packed.data() + k * size_of(spec.out), samples[k].slot(), size_of(spec.out));
  long bad = 0;
  void *args[] = {packed.data(), &bad};
  kernel(args, 0, static_cast<long>(samples.size()));
  return bad == 0;
}

class ReductionKernel {
public:
  explicit ReductionKernel(ReductionSpec spec, ReductionOptions options = {})
      : state_(std::make_shared<State>()) {
    codegen_detail::check_kernel_name(spec.name);
    reduction_detail::map_expression(spec); // validates
    state_->spec = std::move(spec);
    state_->options = std::move(options);
    auto &o = state_->options;
    if (!o.context)
      o.context = Context::default_context();
    if (o.variant)
      o.variant->validate();
    if (o.tune_space.axes.empty())
      o.tune_space = default_tune_space();
    if (o.check_neutral && !verify_neutral(state_->spec, *o.context))
      throw InvalidNeutral("'" + state_->spec.neutral + "' is not an identity of '" +
                           state_->spec.reduce_expr + "' over " +
                           std::string(dtype_name(state_->spec.out)));
  }

  const ReductionSpec &spec() const noexcept { return state_->spec; }
  Context &context() const { return *state_->options.context; }

  std::string source(const VariantParams &v) const {
    return generate_reduction_source(state_->spec, v);
  }

  std::string digest() const {
    const auto &s = state_->spec;
    return detail::Sha256()
        .field("reduction")
        .field(s.name)
        .field(s.signature.str())
        .field(dtype_name(s.out))
        .field(s.neutral)
        .field(s.reduce_expr)
        .field(reduction_detail::map_expression(s))
        .hex();
  }

  Scalar operator()(std::span<const KernelArg> args, std::int64_t n) const {
    return run(args, n, select_variant(args, n));
  }
  Scalar operator()(std::initializer_list<KernelArg> args, std::int64_t n) const {
    return (*this)(std::span<const KernelArg>(args.begin(), args.size()), n);
  }

  /// Stage 1 on `v.workers` lanes, then stage 2 over the non-empty lanes'
  /// partials in lane order. n == 0 yields the neutral element.
  Scalar run(std::span<const KernelArg> args, std::int64_t n, const VariantParams &v) const {
    v.validate();
    const auto &spec = state_->spec;
    std::vector<Scalar> slots;
    const auto packed = exec_detail::pack(spec.signature, args, n, slots);
    const auto kernels = handles(v.unroll);
    const auto lanes = partition(n, v.workers, v.chunking);

    // Non-empty lanes form a prefix of `lanes`.
    std::size_t active = 0;
    while (active < lanes.size() && !lanes[active].empty())
      ++active;
    std::vector<Scalar> partials(active, Scalar::cast(spec.out, 0));
    run_lanes(active, [&](std::size_t w) {
      auto lane_args = packed;
      long resume = 0;
      lane_args.push_back(partials[w].slot());
      lane_args.push_back(&resume);
      for (const auto &r : lanes[w]) {
        kernels.stage1(lane_args.data(), static_cast<long>(r.begin), static_cast<long>(r.end));
        resume = 1;
      }
    });

    const auto width = size_of(spec.out);
    std::vector<unsigned char> contiguous(std::max<std::size_t>(active, 1) * 8);
    for (std::size_t k = 0; k < active; ++k)
      std::memcpy(contiguous.data() + k * width, partials[k].slot(), width);
    long count = static_cast<long>(active);
    Scalar result = Scalar::cast(spec.out, 0);
    void *combine_args[] = {contiguous.data(), &count, result.slot()};
    kernels.combine(combine_args, 0, 1);
    if (result.dtype() != spec.out)
      throw NonScalarResult("reduction produced a " + std::string(dtype_name(result.dtype())) +
                            " instead of " + std::string(dtype_name(spec.out)));
    return result;
  }
  Scalar run(std::initializer_list<KernelArg> args, std::int64_t n, const VariantParams &v) const {
    return run(std::span<const KernelArg>(args.begin(), args.size()), n, v);
  }

  autotune::TuneResult tune(std::span<const KernelArg> args, std::int64_t n) const {
    std::vector<Scalar> slots;
    exec_detail::pack(state_->spec.signature, args, n, slots);
    const auto &o = state_->options;
    return exec_detail::tune_on_scratch(
        context(), o.tune_space, o.tune_protocol, o.tune_options, digest(), args, n,
        [this](int unroll) { handles(unroll); },
        [this](std::span<const KernelArg> a, std::int64_t m, const VariantParams &v) {
          run(a, m, v);
        });
  }
  autotune::TuneResult tune(std::initializer_list<KernelArg> args, std::int64_t n) const {
    return tune(std::span<const KernelArg>(args.begin(), args.size()), n);
  }

private:
  struct Handles {
    jit::KernelHandle stage1;
    jit::KernelHandle combine;
  };

  Handles handles(int unroll) const {
    {
      std::lock_guard lock(state_->mu);
      if (auto it = state_->handles.find(unroll); it != state_->handles.end())
        return it->second;
    }
    VariantParams v;
    v.unroll = unroll;
    const auto mod = context().compile(source(v));
    Handles h{mod.get_kernel(state_->spec.name), mod.get_kernel(state_->spec.name + "_combine")};
    std::lock_guard lock(state_->mu);
    return state_->handles.emplace(unroll, std::move(h)).first->second;
  }

  VariantParams select_variant(std::span<const KernelArg> args, std::int64_t n) const {
    const auto &o = state_->options;
    if (o.variant)
      return *o.variant;
    if (!o.autotune || n == 0)
      return VariantParams::host_default();
    {
      std::lock_guard lock(state_->mu);
      if (auto it = state_->tuned.find(n); it != state_->tuned.end())
        return it->second;
    }
    const auto v = VariantParams::from_assignment(tune(args, n).best);
    std::lock_guard lock(state_->mu);
    state_->tuned.emplace(n, v);
    return v;
  }

  struct State {
    ReductionSpec spec;
    ReductionOptions options;
    std::mutex mu;
    std::map<int, Handles> handles;
    std::map<std::int64_t, VariantParams> tuned;
  };
  std::shared_ptr<State> state_;
};

inline ReductionKernel make_reduction(ReductionSpec spec, ReductionOptions options = {}) {
  return ReductionKernel(std::move(spec), std::move(options));
}

} // namespace rtcg

#endif // RTCG_REDUCTION_HPP
