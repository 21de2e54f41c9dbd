// Copyright 2026 The rtcg-kit Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef RTCG_ELEMENTWISE_HPP
#define RTCG_ELEMENTWISE_HPP

// Elementwise kernels from a C parameter list and a C statement over index
// `i`, e.g.
//
//   auto lin_comb = make_elementwise("float a, float *x, float b, float *y, float *z",
//                                    "z[i] = a*x[i] + b*y[i]", "lin_comb");
//   lin_comb({a, x, b, y, z}, n);
//
// The generated loop runs over [start, end) with the unroll factor of the
// selected variant; the driver splits [0, n) across worker lanes.

#include <cctype>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rtcg/autotune.hpp"
#include "rtcg/context.hpp"
#include "rtcg/csyntax.hpp"
#include "rtcg/detail/sha256.hpp"
#include "rtcg/dtype.hpp"
#include "rtcg/error.hpp"
#include "rtcg/ndarray.hpp"
#include "rtcg/slicing.hpp"

namespace rtcg {

enum class ParamKind { scalar, vector };

struct KernelParam {
  std::string name;
  ParamKind kind = ParamKind::vector;
  Dtype dtype = Dtype::float32;

  friend bool operator==(const KernelParam &, const KernelParam &) = default;
};

struct KernelSignature {
  std::vector<KernelParam> params;

  /// Normalised C text, e.g. `float a, float *x`.
  std::string str() const {
    std::string s;
    for (const auto &p : params) {
      if (!s.empty())
        s += ", ";
      s += std::string(c_name(p.dtype)) + (p.kind == ParamKind::vector ? " *" : " ") + p.name;
    }
    return s;
  }

  std::size_t vector_count() const {
    std::size_t n = 0;
    for (const auto &p : params)
      n += p.kind == ParamKind::vector;
    return n;
  }

  friend bool operator==(const KernelSignature &, const KernelSignature &) = default;
};

/// Names the generated code uses for its own purposes.
inline bool is_reserved_name(std::string_view n) {
  return n == "i" || n == "n" || n == "start" || n == "end" || n == "args" ||
         n.starts_with("rtcg_");
}

namespace signature_detail {

inline std::optional<Dtype> c_type_to_dtype(const std::string &t) {
  static const std::map<std::string, Dtype, std::less<>> table = {
      {"float", Dtype::float32},
      {"double", Dtype::float64},
      {"signed char", Dtype::int8},
      {"int8_t", Dtype::int8},
      {"unsigned char", Dtype::uint8},
      {"uint8_t", Dtype::uint8},
      {"short", Dtype::int16},
      {"short int", Dtype::int16},
      {"signed short", Dtype::int16},
      {"int16_t", Dtype::int16},
      {"unsigned short", Dtype::uint16},
      {"unsigned short int", Dtype::uint16},
      {"uint16_t", Dtype::uint16},
      {"int", Dtype::int32},
      {"signed", Dtype::int32},
      {"signed int", Dtype::int32},
      {"int32_t", Dtype::int32},
      {"unsigned", Dtype::uint32},
      {"unsigned int", Dtype::uint32},
      {"uint32_t", Dtype::uint32},
      {"long", Dtype::int64},
      {"long int", Dtype::int64},
      {"long long", Dtype::int64},
      {"long long int", Dtype::int64},
      {"int64_t", Dtype::int64},
      {"unsigned long", Dtype::uint64},
      {"unsigned long int", Dtype::uint64},
      {"unsigned long long", Dtype::uint64},
      {"uint64_t", Dtype::uint64},
  };
  if (auto it = table.find(t); it != table.end())
    return it->second;
  return std::nullopt;
}

struct Token {
  std::string text; // identifier, "*" or ","
  std::size_t pos;
};

inline std::vector<Token> tokenize(std::string_view s) {
  std::vector<Token> out;
  std::size_t k = 0;
  while (k < s.size()) {
    const char c = s[k];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++k;
    } else if (c == '*' || c == ',') {
      out.push_back({std::string(1, c), k++});
    } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const auto start = k;
      while (k < s.size() && (std::isalnum(static_cast<unsigned char>(s[k])) || s[k] == '_'))
        ++k;
      out.push_back({std::string(s.substr(start, k - start)), start});
    } else {
      throw ParseError("unexpected character '" + std::string(1, c) + "' at position " +
                       std::to_string(k));
    }
  }
  return out;
}

} // namespace signature_detail

/// Parses `param ("," param)*` with `param := ["const"] ctype ["*"] name`.
/// Throws ParseError (with a character position) or UnknownType.
inline KernelSignature parse_signature(std::string_view text) {
  using namespace signature_detail;
  const auto tokens = tokenize(text);
  KernelSignature sig;
  std::size_t k = 0;
  auto at_end = [&] { return k >= tokens.size(); };
  auto pos = [&] { return at_end() ? text.size() : tokens[k].pos; };

  while (!at_end()) {
    const auto param_pos = pos();
    std::vector<std::string> words;
    bool pointer = false;
    while (!at_end() && tokens[k].text != "," && tokens[k].text != "*")
      words.push_back(tokens[k++].text);
    if (!at_end() && tokens[k].text == "*") {
      pointer = true;
      ++k;
      if (at_end() || tokens[k].text == "," || tokens[k].text == "*")
        throw ParseError("expected parameter name at position " + std::to_string(pos()));
      words.push_back(tokens[k++].text);
      if (!at_end() && tokens[k].text != ",")
        throw ParseError("unexpected '" + tokens[k].text + "' at position " +
                         std::to_string(pos()));
    }
    if (words.size() < 2)
      throw ParseError("expected '<type> [*]<name>' at position " + std::to_string(param_pos));
    std::erase(words, std::string("const"));
    if (words.size() < 2)
      throw ParseError("missing type at position " + std::to_string(param_pos));
    KernelParam p;
    p.name = words.back();
    words.pop_back();
    std::string type;
    for (const auto &w : words)
      type += (type.empty() ? "" : " ") + w;
    const auto dt = c_type_to_dtype(type);
    if (!dt)
      throw UnknownType("unknown C type '" + type + "' at position " + std::to_string(param_pos));
    p.dtype = *dt;
    p.kind = pointer ? ParamKind::vector : ParamKind::scalar;
    if (is_reserved_name(p.name))
      throw ParseError("parameter name '" + p.name + "' is reserved, at position " +
                       std::to_string(param_pos));
    for (const auto &q : sig.params)
      if (q.name == p.name)
        throw ParseError("duplicate parameter '" + p.name + "' at position " +
                         std::to_string(param_pos));
    sig.params.push_back(std::move(p));
    if (!at_end()) {
      ++k; // ','
      if (at_end())
        throw ParseError("trailing ',' at position " + std::to_string(text.size()));
    }
  }
  if (sig.vector_count() == 0)
    throw ParseError("signature needs at least one vector parameter, at position " +
                     std::to_string(text.size()));
  return sig;
}

namespace codegen_detail {

inline std::string statement(std::string op) {
  while (!op.empty() && std::isspace(static_cast<unsigned char>(op.back())))
    op.pop_back();
  if (op.empty() || (op.back() != ';' && op.back() != '}'))
    op += ';';
  return op;
}

/// Declarations unpacking `args` into typed locals.
inline std::vector<csyntax::Node> unpack_args(const KernelSignature &sig) {
  using namespace csyntax::ast;
  std::vector<csyntax::Node> out;
  for (std::size_t k = 0; k < sig.params.size(); ++k) {
    const auto &p = sig.params[k];
    const csyntax::CType elem{std::string(c_name(p.dtype))};
    const auto slot = "args[" + std::to_string(k) + "]";
    if (p.kind == ParamKind::vector)
      out.push_back(decl(elem.pointer(), p.name, raw("(" + elem.pointer().declare("") + ")" + slot)));
    else
      out.push_back(decl(elem.as_const(), p.name,
                         raw("*(" + elem.as_const().pointer().declare("") + ")" + slot)));
  }
  return out;
}

/// `{ const long i = rtcg_base + k; body }`
inline csyntax::Node lane_step(std::int64_t k, std::vector<csyntax::Node> body) {
  using namespace csyntax::ast;
  auto idx = k == 0 ? id("rtcg_base") : binary("+", id("rtcg_base"), lit(k));
  std::vector<csyntax::Node> stmts{decl(csyntax::CType{"long", 0, true}, "i", std::move(idx))};
  for (auto &s : body)
    stmts.push_back(std::move(s));
  return block(std::move(stmts));
}

/// The index loop over [start, end): an unrolled main loop plus a scalar tail
/// loop, or a single plain loop for unroll == 1. `body()` yields the
/// statements for one index `i`.
template <class BodyFn>
std::vector<csyntax::Node> index_loops(std::int64_t unroll, BodyFn &&body) {
  using namespace csyntax::ast;
  std::vector<csyntax::Node> out;
  if (unroll == 1) {
    out.push_back(for_range("i", id("start"), id("end"), block(body())));
    return out;
  }
  out.push_back(decl(csyntax::CType{"long"}, "rtcg_base", id("start")));
  std::vector<csyntax::Node> steps;
  for (std::int64_t k = 0; k < unroll; ++k)
    steps.push_back(lane_step(k, body()));
  out.push_back(for_loop(raw(""),
                         binary("<=", binary("+", id("rtcg_base"), lit(unroll)), id("end")),
                         assign(id("rtcg_base"), lit(unroll), "+="), block(std::move(steps))));
  out.push_back(for_loop(raw(""), binary("<", id("rtcg_base"), id("end")), raw("++rtcg_base"),
                         lane_step(0, body())));
  return out;
}

inline csyntax::Node kernel_function(const std::string &name, std::vector<csyntax::Node> body) {
  using namespace csyntax::ast;
  return function(csyntax::CType{"void"}, name,
                  {param(csyntax::CType{"void", 2}, "args"), param(csyntax::CType{"long"}, "start"),
                   param(csyntax::CType{"long"}, "end")},
                  block(std::move(body)));
}

inline const csyntax::Node &prelude() {
  static const auto node = csyntax::ast::raw("#include <math.h>\n#include <stdint.h>");
  return node;
}

inline void check_kernel_name(const std::string &name) {
  if (!csyntax::detail::is_identifier(name) || is_reserved_name(name))
    throw ParseError("invalid kernel name '" + name + "'");
}

} // namespace codegen_detail

/// C source for an elementwise kernel. Deterministic in its inputs; only
/// `variant.unroll` affects the text.
inline std::string generate(const KernelSignature &sig, std::string_view operation,
                            const std::string &name, const VariantParams &variant) {
  using namespace codegen_detail;
  check_kernel_name(name);
  variant.validate();
  auto body = unpack_args(sig);
  const auto op = statement(std::string(operation));
  for (auto &s : index_loops(variant.unroll, [&] {
         return std::vector<csyntax::Node>{csyntax::ast::raw(op)};
       }))
    body.push_back(std::move(s));
  return csyntax::emit(csyntax::ast::translation_unit({prelude(), kernel_function(name, std::move(body))}));
}

/// One argument of a kernel call: an array or a typed scalar.
class KernelArg {
public:
  KernelArg(NdArray &a) : array_(&a) {}
  KernelArg(const NdArray &a) : array_(const_cast<NdArray *>(&a)) {}
  KernelArg(Scalar s) : scalar_(s) {}
  template <Element T> KernelArg(T v) : scalar_(Scalar(v)) {}

  bool is_array() const noexcept { return array_ != nullptr; }
  NdArray &array() const { return *array_; }
  const Scalar &scalar() const noexcept { return scalar_; }
  Dtype dtype() const noexcept { return array_ ? array_->dtype() : scalar_.dtype(); }

private:
  NdArray *array_ = nullptr;
  Scalar scalar_;
};

struct ElementwiseOptions {
  std::shared_ptr<Context> context; // Context::default_context() if empty
  std::optional<VariantParams> variant; // pinned variant
  bool autotune = false;                // tune per problem size on first use
  autotune::ParamSpace tune_space;      // default_tune_space() if no axes
  autotune::MeasurementProtocol tune_protocol;
  autotune::TuneOptions tune_options;
};

/// unroll {1,2,4,8} x workers {1,2,4,... up to the core count} x
/// chunking {contiguous, strided}.
inline autotune::ParamSpace default_tune_space() {
  autotune::ParamSpace s;
  s.axis("unroll", {1, 2, 4, 8});
  std::vector<autotune::ParamValue> workers;
  for (std::int64_t w = 1; w <= std::max(4, logical_cores()); w *= 2)
    workers.push_back(w);
  s.axis("workers", workers);
  s.axis("chunking", std::vector<autotune::ParamValue>{std::string("contiguous"),
                                                        std::string("strided")});
  return s;
}

namespace exec_detail {

/// Checks arguments against the signature and packs them for the ABI.
/// Scalars are copied into `slots` so the pack stays valid.
inline std::vector<void *> pack(const KernelSignature &sig, std::span<const KernelArg> args,
                                std::int64_t n, std::vector<Scalar> &slots) {
  if (args.size() != sig.params.size())
    throw ArityMismatch("kernel takes " + std::to_string(sig.params.size()) +
                        " arguments, got " + std::to_string(args.size()));
  if (n < 0)
    throw ShapeMismatch("negative element count " + std::to_string(n));
  slots.assign(args.size(), Scalar{});
  std::vector<void *> packed(args.size(), nullptr);
  for (std::size_t k = 0; k < args.size(); ++k) {
    const auto &p = sig.params[k];
    const auto &a = args[k];
    if ((p.kind == ParamKind::vector) != a.is_array())
      throw DtypeMismatch("parameter '" + p.name + "' expects " +
                          (p.kind == ParamKind::vector ? "an array" : "a scalar"));
    if (a.dtype() != p.dtype)
      throw DtypeMismatch("parameter '" + p.name + "' expects " +
                          std::string(dtype_name(p.dtype)) + ", got " +
                          std::string(dtype_name(a.dtype())));
    if (a.is_array()) {
      if (a.array().size() < n)
        throw ShapeMismatch("parameter '" + p.name + "' has " +
                            std::to_string(a.array().size()) + " elements, need " +
                            std::to_string(n));
      packed[k] = a.array().data();
    } else {
      slots[k] = a.scalar();
      packed[k] = slots[k].slot();
    }
  }
  return packed;
}

/// Runs a tuning campaign over VariantParams assignments. The array
/// arguments are cloned so that timed runs never touch the caller's data;
/// `prepare` compiles a variant outside the timed region.
template <class Prepare, class Run>
autotune::TuneResult tune_on_scratch(Context &ctx, const autotune::ParamSpace &space,
                                     const autotune::MeasurementProtocol &protocol,
                                     const autotune::TuneOptions &options,
                                     const std::string &kernel_digest,
                                     std::span<const KernelArg> args, std::int64_t n,
                                     Prepare &&prepare, Run &&run) {
  std::vector<NdArray> scratch;
  scratch.reserve(args.size());
  std::vector<KernelArg> scratch_args;
  for (const auto &a : args) {
    if (a.is_array()) {
      scratch.push_back(a.array().clone());
      scratch_args.emplace_back(scratch.back());
    } else {
      scratch_args.push_back(a);
    }
  }
  const autotune::TuneStore store(ctx.tune_root());
  return autotune::tune(
      [&](const autotune::Assignment &a) -> autotune::Runnable {
        const auto v = VariantParams::from_assignment(a);
        v.validate();
        prepare(v.unroll);
        return [&run, &scratch_args, n, v] { run(std::span<const KernelArg>(scratch_args), n, v); };
      },
      space, protocol, store, ctx.fingerprint(), {kernel_digest, "n=" + std::to_string(n)},
      options);
}

} // namespace exec_detail

class ElementwiseKernel {
public:
  ElementwiseKernel(KernelSignature sig, std::string operation, std::string name,
                    ElementwiseOptions options = {})
      : state_(std::make_shared<State>()) {
    codegen_detail::check_kernel_name(name);
    state_->sig = std::move(sig);
    state_->operation = std::move(operation);
    state_->name = std::move(name);
    state_->options = std::move(options);
    if (!state_->options.context)
      state_->options.context = Context::default_context();
    if (state_->options.variant)
      state_->options.variant->validate();
    if (state_->options.tune_space.axes.empty())
      state_->options.tune_space = default_tune_space();
  }

  const KernelSignature &signature() const noexcept { return state_->sig; }
  const std::string &operation() const noexcept { return state_->operation; }
  const std::string &name() const noexcept { return state_->name; }
  Context &context() const { return *state_->options.context; }

  std::string source(const VariantParams &v) const {
    return generate(state_->sig, state_->operation, state_->name, v);
  }

  /// Digest identifying what this kernel computes (not how it is sliced).
  std::string digest() const {
    return detail::Sha256()
        .field("elementwise")
        .field(state_->name)
        .field(state_->sig.str())
        .field(state_->operation)
        .hex();
  }

  /// Runs with the pinned variant, a tuned one, or the host default.
  void operator()(std::span<const KernelArg> args, std::int64_t n) const {
    run(args, n, select_variant(args, n));
  }
  void operator()(std::initializer_list<KernelArg> args, std::int64_t n) const {
    (*this)(std::span<const KernelArg>(args.begin(), args.size()), n);
  }

  /// Runs one explicit variant.
  void run(std::span<const KernelArg> args, std::int64_t n, const VariantParams &v) const {
    v.validate();
    std::vector<Scalar> slots;
    auto packed = exec_detail::pack(state_->sig, args, n, slots);
    if (n == 0)
      return;
    const auto kernel = handle(v.unroll);
    const auto lanes = partition(n, v.workers, v.chunking);
    run_lanes(lanes.size(), [&](std::size_t w) {
      for (const auto &r : lanes[w])
        kernel(packed.data(), static_cast<long>(r.begin), static_cast<long>(r.end));
    });
  }
  void run(std::initializer_list<KernelArg> args, std::int64_t n, const VariantParams &v) const {
    run(std::span<const KernelArg>(args.begin(), args.size()), n, v);
  }

  /// Tunes the variant for `n` elements on scratch copies of the array
  /// arguments; the result is persisted in the context's tune store.
  autotune::TuneResult tune(std::span<const KernelArg> args, std::int64_t n) const {
    std::vector<Scalar> slots;
    exec_detail::pack(state_->sig, args, n, slots); // validate before cloning
    const auto &o = state_->options;
    return exec_detail::tune_on_scratch(
        context(), o.tune_space, o.tune_protocol, o.tune_options, digest(), args, n,
        [this](int unroll) { handle(unroll); },
        [this](std::span<const KernelArg> a, std::int64_t m, const VariantParams &v) {
          run(a, m, v);
        });
  }
  autotune::TuneResult tune(std::initializer_list<KernelArg> args, std::int64_t n) const {
    return tune(std::span<const KernelArg>(args.begin(), args.size()), n);
  }

  /// The compiled kernel for an unroll factor (compiled on first use).
  jit::KernelHandle handle(int unroll) const {
    {
      std::lock_guard lock(state_->mu);
      if (auto it = state_->handles.find(unroll); it != state_->handles.end())
        return it->second;
    }
    VariantParams v;
    v.unroll = unroll;
    const auto mod = context().compile(source(v));
    auto h = mod.get_kernel(state_->name);
    std::lock_guard lock(state_->mu);
    return state_->handles.emplace(unroll, std::move(h)).first->second;
  }

private:
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
    KernelSignature sig;
    std::string operation;
    std::string name;
    ElementwiseOptions options;
    std::mutex mu;
    std::map<int, jit::KernelHandle> handles;
    std::map<std::int64_t, VariantParams> tuned;
  };
  std::shared_ptr<State> state_;
};

inline ElementwiseKernel make_elementwise(std::string_view signature, std::string operation,
                                          std::string name, ElementwiseOptions options = {}) {
  return ElementwiseKernel(parse_signature(signature), std::move(operation), std::move(name),
                           std::move(options));
}

/// An elementwise operation whose C types follow the dtypes of the arguments
/// it is called with. One kernel is generated per dtype combination. The
/// output array is allocated with the shape and dtype of the first array
/// argument.
class AdaptiveElementwiseKernel {
public:
  AdaptiveElementwiseKernel(std::vector<std::string> inputs, std::string output,
                            std::string operation, std::string name,
                            ElementwiseOptions options = {})
      : inputs_(std::move(inputs)), output_(std::move(output)),
        operation_(std::move(operation)), name_(std::move(name)), options_(std::move(options)),
        state_(std::make_shared<State>()) {
    codegen_detail::check_kernel_name(name_);
    if (!options_.context)
      options_.context = Context::default_context();
  }

  /// The concrete kernel for these argument dtypes.
  ElementwiseKernel specialize(std::span<const KernelArg> args) const {
    if (args.size() != inputs_.size())
      throw ArityMismatch(name_ + " takes " + std::to_string(inputs_.size()) +
                          " inputs, got " + std::to_string(args.size()));
    std::string combo;
    const KernelArg *first_array = nullptr;
    for (const auto &a : args) {
      combo += std::string(dtype_name(a.dtype())) + (a.is_array() ? "*" : "") + ";";
      if (a.is_array() && !first_array)
        first_array = &a;
    }
    if (!first_array)
      throw ArityMismatch(name_ + " needs at least one array argument");
    {
      std::lock_guard lock(state_->mu);
      if (auto it = state_->kernels.find(combo); it != state_->kernels.end())
        return it->second;
    }
    // Keyword replacement over a signature template such as
    // "${tp_a} a, ${tp_x} *x, ${tp_z} *z".
    std::string tmpl;
    csyntax::Bindings types;
    for (std::size_t k = 0; k < inputs_.size(); ++k) {
      tmpl += "${tp_" + inputs_[k] + "} " + (args[k].is_array() ? "*" : "") + inputs_[k] + ", ";
      types["tp_" + inputs_[k]] = std::string(c_name(args[k].dtype()));
    }
    tmpl += "${tp_" + output_ + "} *" + output_;
    types["tp_" + output_] = std::string(c_name(first_array->dtype()));
    auto kernel = make_elementwise(csyntax::substitute(tmpl, types), operation_, name_, options_);
    std::lock_guard lock(state_->mu);
    ++state_->generations;
    return state_->kernels.emplace(combo, std::move(kernel)).first->second;
  }

  NdArray operator()(std::span<const KernelArg> args) const {
    auto kernel = specialize(args);
    const NdArray *first = nullptr;
    for (const auto &a : args)
      if (a.is_array()) {
        first = &a.array();
        break;
      }
    NdArray out(first->pool(), first->dtype(), first->shape());
    std::vector<KernelArg> all(args.begin(), args.end());
    all.emplace_back(out);
    kernel(all, first->size());
    return out;
  }
  NdArray operator()(std::initializer_list<KernelArg> args) const {
    return (*this)(std::span<const KernelArg>(args.begin(), args.size()));
  }

  /// Number of distinct kernels generated so far.
  std::size_t generations() const {
    std::lock_guard lock(state_->mu);
    return state_->generations;
  }

private:
  struct State {
    std::mutex mu;
    std::map<std::string, ElementwiseKernel> kernels;
    std::size_t generations = 0;
  };
  std::vector<std::string> inputs_;
  std::string output_;
  std::string operation_;
  std::string name_;
  ElementwiseOptions options_;
  std::shared_ptr<State> state_;
};

inline AdaptiveElementwiseKernel make_elementwise_adaptive(std::vector<std::string> inputs,
                                                           std::string output,
                                                           std::string operation, std::string name,
                                                           ElementwiseOptions options = {}) {
  return AdaptiveElementwiseKernel(std::move(inputs), std::move(output), std::move(operation),
                                   std::move(name), std::move(options));
}

} // namespace rtcg

#endif // RTCG_ELEMENTWISE_HPP
