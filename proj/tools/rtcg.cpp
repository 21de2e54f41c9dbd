// Copyright 2026 The rtcg-kit Authors
// SPDX-License-Identifier: Apache-2.0

// rtcg: cache administration, code inspection, demos, benchmarks and tuning
// campaigns. Exit status is 0 on success, 1 on operational failure and 2 on
// usage errors.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <regex>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "rtcg/rtcg.hpp"

namespace {

using nlohmann::json;
using namespace rtcg;

constexpr int kCliSchema = 1;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Globals {
  std::string cache_dir;
  std::string cc;
  std::string format = "human";
  bool verbose = false;

  bool json_out() const { return format == "json"; }

  std::filesystem::path cache_root() const {
    return cache_dir.empty() ? detail::default_cache_root() : std::filesystem::path(cache_dir);
  }
};

Globals g;

std::shared_ptr<Context> make_context() {
  auto tc = jit::ToolchainConfig::detect(g.cc);
  if (g.verbose) {
    std::string flags;
    for (const auto &f : tc.flags)
      flags += (flags.empty() ? "" : " ") + f;
    std::cerr << "cache root: " << g.cache_root().string() << "\n"
              << "compiler:   " << tc.compiler << "\n"
              << "flags:      " << flags << "\n"
              << "toolchain:  " << tc.identity << "\n";
  }
  return std::make_shared<Context>(std::move(tc), g.cache_root());
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void emit(const json &j, const std::string &human) {
  if (g.json_out())
    std::cout << j.dump(2) << "\n";
  else
    std::cout << human;
}

std::string fmt_time(std::optional<std::int64_t> t) { return t ? std::to_string(*t) : "-"; }

// ---------------------------------------------------------------- cache

std::int64_t parse_duration(const std::string &text) {
  static const std::regex re(R"(^(\d+)([smhdw]?)$)");
  std::smatch m;
  if (!std::regex_match(text, m, re))
    throw UsageError("invalid duration '" + text + "' (expected e.g. 30s, 15m, 12h, 7d)");
  const std::int64_t v = std::stoll(m[1]);
  static const std::map<std::string, std::int64_t> unit = {
      {"", 1}, {"s", 1}, {"m", 60}, {"h", 3600}, {"d", 86400}, {"w", 604800}};
  return v * unit.at(m[2]);
}

int cache_info() {
  jit::CacheStore store(g.cache_root());
  const auto s = store.stats();
  json j{{"schema", kCliSchema},
         {"command", "cache info"},
         {"root", g.cache_root().string()},
         {"entries", s.entries},
         {"bytes", s.bytes},
         {"oldest_unix", s.oldest_unix ? json(*s.oldest_unix) : json(nullptr)},
         {"newest_unix", s.newest_unix ? json(*s.newest_unix) : json(nullptr)}};
  emit(j, "root: " + g.cache_root().string() + "\nentries: " + std::to_string(s.entries) +
              "\nbytes: " + std::to_string(s.bytes) + "\noldest: " + fmt_time(s.oldest_unix) +
              "\nnewest: " + fmt_time(s.newest_unix) + "\n");
  return 0;
}

int cache_clear() {
  jit::CacheStore store(g.cache_root());
  const auto n = store.clear();
  emit({{"schema", kCliSchema}, {"command", "cache clear"}, {"removed", n}},
       "removed: " + std::to_string(n) + "\n");
  return 0;
}

int cache_prune(const std::string &older_than) {
  const auto age = parse_duration(older_than);
  jit::CacheStore store(g.cache_root());
  const auto n = store.prune(std::chrono::seconds(age));
  emit({{"schema", kCliSchema},
        {"command", "cache prune"},
        {"older_than_seconds", age},
        {"removed", n}},
       "removed: " + std::to_string(n) + "\n");
  return 0;
}

// -------------------------------------------------------------- codegen

struct CodegenArgs {
  std::string kind;
  std::string method = "ast";
  int unroll = 1;
  std::string type = "float";
  std::string name;
  std::string signature;
  std::string operation;
  std::string map;
  std::string reduce = "a + b";
  std::string neutral = "0";
  std::string out_type = "double";
};

Dtype parse_dtype(const std::string &s) {
  if (auto d = dtype_from_name(s))
    return *d;
  throw UsageError("unknown dtype '" + s + "'");
}

int codegen_dump(const CodegenArgs &a) {
  std::string source;
  try {
    if (a.kind == "unrolled-add") {
      if (a.unroll < 1)
        throw UsageError("--unroll must be positive");
      const auto name = a.name.empty() ? "vector_add" : a.name;
      source = a.method == "template"
                   ? csyntax::render_unrolled_add(a.type, a.unroll, name)
                   : csyntax::emit(csyntax::build_unrolled_add(a.type, a.unroll, name));
    } else {
      if (a.method == "template")
        throw UsageError("--method template is only available for --kind unrolled-add");
      VariantParams v;
      v.unroll = a.unroll;
      v.validate();
      if (a.signature.empty())
        throw UsageError("--signature is required for --kind " + a.kind);
      if (a.kind == "elementwise") {
        if (a.operation.empty())
          throw UsageError("--operation is required for --kind elementwise");
        source = generate(parse_signature(a.signature), a.operation,
                          a.name.empty() ? "kernel" : a.name, v);
      } else {
        ReductionSpec spec{parse_dtype(a.out_type), a.neutral, a.reduce, a.map,
                           parse_signature(a.signature), a.name.empty() ? "reduce" : a.name};
        source = generate_reduction_source(spec, v);
      }
    }
  } catch (const ParseError &e) {
    throw UsageError(e.what());
  } catch (const InvalidVariant &e) {
    throw UsageError(e.what());
  }
  emit({{"schema", kCliSchema}, {"kind", a.kind}, {"method", a.method}, {"source", source}},
       source);
  return 0;
}

// ------------------------------------------------------------ kernels

// The kernels behind `demo`, `bench` and `tune`. Each checks itself against
// a sequential host oracle.
struct Workload {
  std::string op;
  std::int64_t n = 0;
  std::shared_ptr<Context> ctx;
  std::vector<NdArray> arrays;
  std::vector<KernelArg> args;
  std::optional<ElementwiseKernel> ew;
  std::optional<ReductionKernel> red;
  std::function<bool()> check;

  void run(const VariantParams &v) {
    if (ew)
      ew->run(args, n, v);
    else
      last = red->run(args, n, v);
  }
  autotune::TuneResult tune() { return ew ? ew->tune(args, n) : red->tune(args, n); }
  std::string source(const VariantParams &v) const { return ew ? ew->source(v) : red->source(v); }

  Scalar last;
};

std::unique_ptr<Workload> make_workload(const std::string &op, std::int64_t n,
                                        std::shared_ptr<Context> ctx,
                                        const ElementwiseOptions &base = {}) {
  if (n < 0)
    throw UsageError("--n must be non-negative");
  auto w = std::make_unique<Workload>();
  w->op = op;
  w->n = n;
  w->ctx = ctx;
  ElementwiseOptions opts = base;
  opts.context = ctx;
  std::mt19937_64 rng(42);
  const auto pool = ctx->pool();
  const Shape shape{n};
  w->arrays.reserve(3);

  if (op == "double") {
    std::uniform_real_distribution<float> dist(-100.0f, 100.0f);
    std::vector<float> x(static_cast<std::size_t>(n));
    for (auto &v : x)
      v = dist(rng);
    w->arrays.push_back(from_host<float>(pool, x));
    w->arrays.emplace_back(pool, Dtype::float32, shape);
    w->args = {w->arrays[0], w->arrays[1]};
    w->ew = make_elementwise("float *x, float *y", "y[i] = 2*x[i]", "double_it", opts);
    w->check = [wp = w.get(), x] {
      const auto y = wp->arrays[1].to_host<float>();
      for (std::size_t k = 0; k < x.size(); ++k)
        if (y[k] != 2 * x[k])
          return false;
      return true;
    };
  } else if (op == "lincomb") {
    std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
    std::vector<float> x(static_cast<std::size_t>(n)), y(x.size());
    for (auto &v : x)
      v = dist(rng);
    for (auto &v : y)
      v = dist(rng);
    const float a = 2.5f, b = -1.25f;
    w->arrays.push_back(from_host<float>(pool, x));
    w->arrays.push_back(from_host<float>(pool, y));
    w->arrays.emplace_back(pool, Dtype::float32, shape);
    w->args = {a, w->arrays[0], b, w->arrays[1], w->arrays[2]};
    w->ew = make_elementwise("float a, float *x, float b, float *y, float *z",
                             "z[i] = a*x[i] + b*y[i]", "lin_comb", opts);
    w->check = [wp = w.get(), x, y, a, b] {
      const auto z = wp->arrays[2].to_host<float>();
      for (std::size_t k = 0; k < x.size(); ++k)
        if (z[k] != a * x[k] + b * y[k])
          return false;
      return true;
    };
  } else if (op == "dot") {
    // Small integers keep every partial sum exact, so any slicing agrees
    // with the sequential fold.
    std::uniform_int_distribution<int> dist(-8, 8);
    std::vector<double> x(static_cast<std::size_t>(n)), y(x.size());
    for (auto &v : x)
      v = dist(rng);
    for (auto &v : y)
      v = dist(rng);
    w->arrays.push_back(from_host<double>(pool, x));
    w->arrays.push_back(from_host<double>(pool, y));
    w->args = {w->arrays[0], w->arrays[1]};
    ReductionOptions ro;
    static_cast<ElementwiseOptions &>(ro) = opts;
    w->red = make_reduction({Dtype::float64, "0", "a + b", "x[i] * y[i]",
                             parse_signature("double *x, double *y"), "dot"},
                            ro);
    w->check = [wp = w.get(), x, y] {
      double acc = 0;
      for (std::size_t k = 0; k < x.size(); ++k)
        acc += x[k] * y[k];
      return wp->last.dtype() == Dtype::float64 && wp->last.as<double>() == acc;
    };
  } else {
    throw UsageError("unknown op '" + op + "' (expected double, lincomb or dot)");
  }
  return w;
}

// ---------------------------------------------------------------- demo

int demo(const std::string &which, std::optional<std::int64_t> n_opt) {
  auto ctx = make_context();
  if (which == "double" && !n_opt) {
    // A 4x4 array, doubled on upload and checked on download.
    std::vector<float> host(16);
    for (std::size_t k = 0; k < host.size(); ++k)
      host[k] = 0.5f * static_cast<float>(k) - 3.0f;
    auto a = from_host<float>(ctx->pool(), Dtype::float32, Shape{4, 4},
                              std::span<const float>(host));
    auto out = NdArray(ctx->pool(), Dtype::float32, Shape{4, 4});
    ElementwiseOptions o;
    o.context = ctx;
    const auto t0 = std::chrono::steady_clock::now();
    auto k = make_elementwise("float *x, float *y", "y[i] = 2*x[i]", "double_it", o);
    k({a, out}, a.size());
    const double secs = seconds_since(t0);
    const auto back = out.to_host<float>();
    bool pass = true;
    for (std::size_t i = 0; i < host.size(); ++i)
      pass = pass && back[i] == 2 * host[i];
    std::string grid;
    for (int r = 0; r < 4; ++r) {
      for (int c = 0; c < 4; ++c) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%7.2f", static_cast<double>(back[r * 4 + c]));
        grid += buf;
      }
      grid += "\n";
    }
    emit({{"schema", kCliSchema},
          {"demo", "double"},
          {"shape", {4, 4}},
          {"seconds", secs},
          {"result", back},
          {"pass", pass}},
         grid + "seconds: " + std::to_string(secs) + "\n" + (pass ? "PASS" : "FAIL") + "\n");
    return pass ? 0 : 1;
  }

  const std::int64_t n = n_opt.value_or(which == "dot" ? 1000 : 1000000);
  auto w = make_workload(which, n, ctx);
  const auto v = VariantParams::host_default();
  const auto t0 = std::chrono::steady_clock::now();
  w->run(v); // includes compilation on a cold cache
  const double first = seconds_since(t0);
  const auto t1 = std::chrono::steady_clock::now();
  w->run(v);
  const double warm = seconds_since(t1);
  const bool pass = w->check();
  json j{{"schema", kCliSchema}, {"demo", which},          {"n", n},
         {"variant", v.to_string()}, {"first_seconds", first}, {"seconds", warm},
         {"pass", pass}};
  std::string human = "n: " + std::to_string(n) + "\nvariant: " + v.to_string() +
                      "\nfirst call: " + std::to_string(first) + " s\nwarm call: " +
                      std::to_string(warm) + " s\n";
  if (which == "dot") {
    j["result"] = w->last.as<double>();
    human += "result: " + w->last.to_string() + "\n";
  }
  emit(j, human + (pass ? "PASS" : "FAIL") + "\n");
  return pass ? 0 : 1;
}

// --------------------------------------------------------------- bench

struct BenchArgs {
  std::string op = "lincomb";
  std::int64_t n = 1000000;
  int repetitions = 5;
  std::optional<int> unroll, workers;
  std::optional<std::string> chunking;
};

int bench(const BenchArgs &a) {
  auto ctx = make_context();
  auto v = VariantParams::host_default();
  if (a.unroll)
    v.unroll = *a.unroll;
  if (a.workers)
    v.workers = *a.workers;
  try {
    if (a.chunking)
      v.chunking = chunking_from_string(*a.chunking);
    v.validate();
  } catch (const InvalidVariant &e) {
    throw UsageError(e.what());
  }
  if (a.repetitions < 1)
    throw UsageError("--repetitions must be at least 1");
  auto w = make_workload(a.op, a.n, ctx);
  w->run(v); // compile and warm up
  double best = std::numeric_limits<double>::infinity();
  for (int r = 0; r < a.repetitions; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    w->run(v);
    best = std::min(best, seconds_since(t0));
  }
  const bool pass = w->check();
  const auto c = ctx->pool()->counters();
  json j{{"schema", kCliSchema},
         {"op", a.op},
         {"n", a.n},
         {"seconds", best},
         {"repetitions", a.repetitions},
         {"variant", v.to_string()},
         {"gitless_fingerprint", ctx->fingerprint().digest()},
         {"pass", pass},
         {"pool", {{"allocations_served", c.allocations_served},
                   {"pool_hits", c.pool_hits},
                   {"bytes_held", c.bytes_held},
                   {"bytes_live", c.bytes_live}}}};
  emit(j, "op: " + a.op + "\nn: " + std::to_string(a.n) + "\nvariant: " + v.to_string() +
              "\nseconds (min of " + std::to_string(a.repetitions) +
              "): " + std::to_string(best) + "\nfingerprint: " + ctx->fingerprint().digest() +
              "\npool: " + std::to_string(c.allocations_served) + " allocations, " +
              std::to_string(c.pool_hits) + " hits\n" + (pass ? "PASS" : "FAIL") + "\n");
  return pass ? 0 : 1;
}

// ---------------------------------------------------------------- tune

struct TuneArgs {
  std::string kernel;
  std::vector<std::string> axes;
  std::int64_t n = 1000000;
  std::optional<std::size_t> sample;
  std::uint64_t seed = 0;
  bool no_prune = false;
  int warmup = 1;
  int repetitions = 5;
  std::string statistic = "minimum";
  double timeout = 10.0;
};

autotune::ParamSpace parse_axes(const std::vector<std::string> &specs) {
  autotune::ParamSpace space;
  static const std::regex int_re(R"(^-?\d+$)");
  for (const auto &s : specs) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == s.size())
      throw UsageError("invalid --axis '" + s + "' (expected name=v1,v2,...)");
    std::vector<autotune::ParamValue> values;
    std::stringstream rest(s.substr(eq + 1));
    for (std::string tok; std::getline(rest, tok, ',');) {
      if (tok.empty())
        throw UsageError("empty value in --axis '" + s + "'");
      if (std::regex_match(tok, int_re))
        values.emplace_back(std::stoll(tok));
      else
        values.emplace_back(tok);
    }
    space.axis(s.substr(0, eq), std::move(values));
  }
  return space;
}

/// Simulated cost of a variant in milliseconds: fastest at unroll 8 and one
/// worker. Used with a virtual clock, so the campaign takes no real time.
double synthetic_cost_ms(const autotune::Assignment &a) {
  double ms = 1.0;
  if (const auto *u = a.find("unroll"); u && std::holds_alternative<std::int64_t>(*u))
    ms += std::abs(static_cast<double>(std::get<std::int64_t>(*u)) - 8.0);
  if (const auto *w = a.find("workers"); w && std::holds_alternative<std::int64_t>(*w))
    ms += static_cast<double>(std::get<std::int64_t>(*w)) - 1.0;
  return ms;
}

int tune_cmd(const TuneArgs &a) {
  autotune::MeasurementProtocol protocol;
  protocol.warmup = a.warmup;
  protocol.repetitions = a.repetitions;
  if (a.statistic != "minimum" && a.statistic != "median")
    throw UsageError("--statistic must be minimum or median");
  protocol.statistic =
      a.statistic == "median" ? autotune::Statistic::median : autotune::Statistic::minimum;
  protocol.timeout_seconds = a.timeout;
  if (a.n < 0)
    throw UsageError("--n must be non-negative");

  autotune::TuneOptions topts;
  topts.pruning.enabled = !a.no_prune;
  topts.sample = a.sample;
  topts.seed = a.seed;
  auto space = a.axes.empty() ? autotune::ParamSpace{} : parse_axes(a.axes);

  auto ctx = make_context();
  autotune::TuneResult result;
  if (a.kernel == "synthetic") {
    if (space.axes.empty())
      space.axis("unroll", {1, 2, 4, 8}).axis("workers", {1, 2, 4});
    double now = 0.0;
    protocol.clock = [&now] { return now; };
    const autotune::TuneStore store(ctx->tune_root());
    result = autotune::tune(
        [&now](const autotune::Assignment &asg) -> autotune::Runnable {
          const double cost = synthetic_cost_ms(asg) / 1000.0;
          return [&now, cost] { now += cost; };
        },
        space, protocol, store, ctx->fingerprint(),
        {detail::sha256_hex("synthetic cost model 1"), "n=" + std::to_string(a.n)}, topts);
  } else {
    ElementwiseOptions base;
    base.tune_space = space;
    base.tune_protocol = protocol;
    base.tune_options = topts;
    std::unique_ptr<Workload> w;
    try {
      w = make_workload(a.kernel, a.n, ctx, base);
    } catch (const UsageError &) {
      throw UsageError("unknown kernel '" + a.kernel +
                       "' (expected lincomb, double, dot or synthetic)");
    }
    result = w->tune();
  }

  json rows = json::array();
  std::string table;
  for (const auto &e : result.table) {
    json row{{"assignment", e.assignment.to_string()}, {"status", autotune::to_string(e.status)}};
    row["seconds"] = std::isfinite(e.statistic) ? json(e.statistic) : json(nullptr);
    if (!e.reason.empty())
      row["reason"] = e.reason;
    rows.push_back(row);
    char buf[64];
    if (std::isfinite(e.statistic))
      std::snprintf(buf, sizeof buf, "%12.6f s", e.statistic);
    else
      std::snprintf(buf, sizeof buf, "%14s", "-");
    table += "  " + e.assignment.to_string() + "  " + std::string(autotune::to_string(e.status)) +
             "  " + buf + (e.reason.empty() || e.status == autotune::EntryStatus::pruned
                               ? ""
                               : "  (" + e.reason + ")") +
             "\n";
  }
  const auto path = autotune::TuneStore(ctx->tune_root()).path_for(ctx->fingerprint(), result.problem);
  emit({{"schema", kCliSchema},
        {"kernel", a.kernel},
        {"n", a.n},
        {"best", result.best.to_string()},
        {"best_seconds", result.best_statistic},
        {"cached", result.cached},
        {"measurements", result.measurements},
        {"table", rows},
        {"store", path.string()}},
       "kernel: " + a.kernel + "\nn: " + std::to_string(a.n) + "\n" + table +
           "best: " + result.best.to_string() + " (" + std::to_string(result.best_statistic) +
           " s)\ncached: " + (result.cached ? "true" : "false") +
           "\nmeasurements: " + std::to_string(result.measurements) + "\n");
  return 0;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"rtcg - run-time code generation toolkit"};
  app.set_version_flag("--version", std::string(kToolkitVersion));
  app.require_subcommand(1);
  app.fallthrough();
  app.option_defaults()->always_capture_default();
  app.add_option("--cache-dir", g.cache_dir, "Cache root (default: $RTCG_CACHE_DIR or ~/.cache/rtcg-kit)");
  app.add_option("--cc", g.cc, "C compiler (default: $RTCG_CC or cc)");
  app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"human", "json"}));
  app.add_flag("-v,--verbose", g.verbose, "Print the resolved configuration to stderr");

  std::function<int()> action;

  auto *cache = app.add_subcommand("cache", "Inspect or clean the compile cache");
  cache->require_subcommand(1);
  cache->add_subcommand("info", "Entry count, size and age range")->callback([&] {
    action = cache_info;
  });
  cache->add_subcommand("clear", "Remove every entry")->callback([&] { action = cache_clear; });
  std::string older_than;
  auto *prune = cache->add_subcommand("prune", "Remove entries older than a duration");
  prune->add_option("--older-than", older_than, "Age such as 30s, 15m, 12h or 7d")->required();
  prune->callback([&] { action = [&] { return cache_prune(older_than); }; });

  auto *codegen = app.add_subcommand("codegen", "Show generated C source");
  codegen->require_subcommand(1);
  CodegenArgs cg;
  auto *dump = codegen->add_subcommand("dump", "Print the source exactly as it would be compiled");
  dump->add_option("--kind", cg.kind)
      ->required()
      ->check(CLI::IsMember({"elementwise", "reduction", "unrolled-add"}));
  dump->add_option("--method", cg.method, "Generation method for unrolled-add")
      ->check(CLI::IsMember({"template", "ast"}));
  dump->add_option("--unroll", cg.unroll);
  dump->add_option("--type", cg.type, "Element C type for unrolled-add");
  dump->add_option("--name", cg.name, "Kernel name");
  dump->add_option("--signature", cg.signature, "Parameter list, e.g. \"float a, float *x\"");
  dump->add_option("--operation", cg.operation, "Elementwise C statement over i");
  dump->add_option("--map", cg.map, "Reduction map expression over i");
  dump->add_option("--reduce", cg.reduce, "Reduction combiner over a and b");
  dump->add_option("--neutral", cg.neutral, "Neutral element of the combiner");
  dump->add_option("--out-type", cg.out_type, "Reduction result dtype");
  dump->callback([&] { action = [&] { return codegen_dump(cg); }; });

  auto *demo_cmd = app.add_subcommand("demo", "Run an example kernel against a host oracle");
  std::string demo_kind;
  std::optional<std::int64_t> demo_n;
  demo_cmd->add_option("kind", demo_kind)->required()->check(CLI::IsMember({"double", "lincomb", "dot"}));
  demo_cmd->add_option("--n", demo_n, "Element count");
  demo_cmd->callback([&] {
    action = [&] {
      if (demo_n && *demo_n < 0)
        throw UsageError("--n must be non-negative");
      return demo(demo_kind, demo_n);
    };
  });

  auto *bench_cmd = app.add_subcommand("bench", "Time one kernel variant");
  BenchArgs ba;
  bench_cmd->add_option("--op", ba.op)->check(CLI::IsMember({"double", "lincomb", "dot"}));
  bench_cmd->add_option("--n", ba.n);
  bench_cmd->add_option("--repetitions", ba.repetitions);
  bench_cmd->add_option("--unroll", ba.unroll);
  bench_cmd->add_option("--workers", ba.workers);
  bench_cmd->add_option("--chunking", ba.chunking);
  bench_cmd->callback([&] { action = [&] { return bench(ba); }; });

  auto *tune = app.add_subcommand("tune", "Run a tuning campaign");
  TuneArgs ta;
  tune->add_option("--kernel", ta.kernel)
      ->required()
      ->check(CLI::IsMember({"lincomb", "double", "dot", "synthetic"}));
  tune->add_option("--axis", ta.axes, "Axis as name=v1,v2,... (repeatable)");
  tune->add_option("--n", ta.n);
  tune->add_option("--sample", ta.sample, "Measure a random subset of this size");
  tune->add_option("--seed", ta.seed);
  tune->add_flag("--no-prune", ta.no_prune);
  tune->add_option("--warmup", ta.warmup);
  tune->add_option("--repetitions", ta.repetitions);
  tune->add_option("--statistic", ta.statistic);
  tune->add_option("--timeout", ta.timeout, "Per-repetition limit in seconds");
  tune->callback([&] { action = [&] { return tune_cmd(ta); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    return action();
  } catch (const UsageError &e) {
    std::cerr << "rtcg: " << e.what() << "\n";
    return 2;
  } catch (const AllVariantsFailed &e) {
    std::cerr << "rtcg: every variant failed:\n";
    for (const auto &r : e.reasons())
      std::cerr << "  " << r << "\n";
    return 1;
  } catch (const std::exception &e) {
    std::cerr << "rtcg: " << e.what() << "\n";
    return 1;
  }
}
