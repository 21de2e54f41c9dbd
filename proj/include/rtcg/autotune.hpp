// Copyright 2026 The rtcg-kit Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef RTCG_AUTOTUNE_HPP
#define RTCG_AUTOTUNE_HPP

// Empirical variant selection: enumerate a grid of code-variant parameters,
// time each candidate, keep the fastest, and remember the answer per
// platform fingerprint and problem class so the search runs once.

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iterator>
#include <limits>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "rtcg/detail/fs.hpp"
#include "rtcg/error.hpp"
#include "rtcg/jit/fingerprint.hpp"
#include "rtcg/version.hpp"

namespace rtcg::autotune {

using ParamValue = std::variant<std::int64_t, std::string>;

inline std::string to_string(const ParamValue &v) {
  if (const auto *i = std::get_if<std::int64_t>(&v))
    return std::to_string(*i);
  return std::get<std::string>(v);
}

inline nlohmann::json to_json(const ParamValue &v) {
  if (const auto *i = std::get_if<std::int64_t>(&v))
    return *i;
  return std::get<std::string>(v);
}

inline ParamValue param_from_json(const nlohmann::json &j) {
  if (j.is_number_integer())
    return j.get<std::int64_t>();
  return j.get<std::string>();
}

/// A full assignment of values to axes, in axis order.
class Assignment {
public:
  Assignment() = default;
  explicit Assignment(std::vector<std::pair<std::string, ParamValue>> items)
      : items_(std::move(items)) {}

  const std::vector<std::pair<std::string, ParamValue>> &items() const noexcept { return items_; }

  const ParamValue *find(std::string_view axis) const {
    for (const auto &[k, v] : items_)
      if (k == axis)
        return &v;
    return nullptr;
  }
  const ParamValue &at(std::string_view axis) const {
    if (const auto *v = find(axis))
      return *v;
    throw TuneError("assignment has no axis '" + std::string(axis) + "'");
  }
  std::int64_t get_int(std::string_view axis) const {
    const auto &v = at(axis);
    if (const auto *i = std::get_if<std::int64_t>(&v))
      return *i;
    throw TuneError("axis '" + std::string(axis) + "' is not an integer");
  }
  const std::string &get_str(std::string_view axis) const {
    const auto &v = at(axis);
    if (const auto *s = std::get_if<std::string>(&v))
      return *s;
    throw TuneError("axis '" + std::string(axis) + "' is not a token");
  }

  std::string to_string() const {
    std::string s;
    for (const auto &[k, v] : items_)
      s += (s.empty() ? "" : ",") + k + "=" + autotune::to_string(v);
    return s;
  }

  nlohmann::json to_json() const {
    auto j = nlohmann::json::array();
    for (const auto &[k, v] : items_)
      j.push_back({k, autotune::to_json(v)});
    return j;
  }
  static Assignment from_json(const nlohmann::json &j) {
    std::vector<std::pair<std::string, ParamValue>> items;
    for (const auto &e : j)
      items.emplace_back(e.at(0).get<std::string>(), param_from_json(e.at(1)));
    return Assignment(std::move(items));
  }

  friend bool operator==(const Assignment &, const Assignment &) = default;

private:
  std::vector<std::pair<std::string, ParamValue>> items_;
};

struct Axis {
  std::string name;
  std::vector<ParamValue> values;

  friend bool operator==(const Axis &, const Axis &) = default;
};

struct ParamSpace {
  std::vector<Axis> axes;
  std::vector<std::function<bool(const Assignment &)>> constraints;

  ParamSpace &axis(std::string name, std::vector<ParamValue> values) {
    axes.push_back({std::move(name), std::move(values)});
    return *this;
  }
  ParamSpace &axis(std::string name, std::initializer_list<std::int64_t> values) {
    return axis(std::move(name), std::vector<ParamValue>(values.begin(), values.end()));
  }
  ParamSpace &constrain(std::function<bool(const Assignment &)> pred) {
    constraints.push_back(std::move(pred));
    return *this;
  }
};

/// Cartesian product of the axes (first axis varies slowest), filtered by
/// the constraints. Throws EmptySpace if nothing survives.
inline std::vector<Assignment> enumerate(const ParamSpace &space) {
  if (space.axes.empty())
    throw EmptySpace("parameter space has no axes");
  for (const auto &a : space.axes)
    if (a.values.empty())
      throw EmptySpace("axis '" + a.name + "' has no candidates");

  std::vector<Assignment> out;
  std::vector<std::size_t> idx(space.axes.size(), 0);
  for (bool more = true; more;) {
    std::vector<std::pair<std::string, ParamValue>> items;
    for (std::size_t k = 0; k < idx.size(); ++k)
      items.emplace_back(space.axes[k].name, space.axes[k].values[idx[k]]);
    Assignment a(std::move(items));
    if (std::all_of(space.constraints.begin(), space.constraints.end(),
                    [&](const auto &c) { return c(a); }))
      out.push_back(std::move(a));
    // odometer step, last axis fastest
    more = false;
    for (std::size_t k = idx.size(); k-- > 0;) {
      if (++idx[k] < space.axes[k].values.size()) {
        more = true;
        break;
      }
      idx[k] = 0;
    }
  }
  if (out.empty())
    throw EmptySpace("every assignment was rejected by the constraints");
  return out;
}

enum class Statistic { minimum, median };

inline std::string_view to_string(Statistic s) {
  return s == Statistic::minimum ? "minimum" : "median";
}

struct MeasurementProtocol {
  int warmup = 1;
  int repetitions = 5;
  Statistic statistic = Statistic::minimum;
  double timeout_seconds = 10.0; // per repetition
  std::function<double()> clock; // seconds; a monotonic clock if empty

  nlohmann::json to_json() const {
    return {{"warmup", warmup},
            {"repetitions", repetitions},
            {"statistic", to_string(statistic)},
            {"timeout_seconds", timeout_seconds}};
  }
  static MeasurementProtocol from_json(const nlohmann::json &j) {
    MeasurementProtocol p;
    p.warmup = j.at("warmup").get<int>();
    p.repetitions = j.at("repetitions").get<int>();
    p.statistic = j.at("statistic").get<std::string>() == "median" ? Statistic::median
                                                                    : Statistic::minimum;
    p.timeout_seconds = j.at("timeout_seconds").get<double>();
    return p;
  }
  friend bool operator==(const MeasurementProtocol &a, const MeasurementProtocol &b) {
    return a.warmup == b.warmup && a.repetitions == b.repetitions &&
           a.statistic == b.statistic && a.timeout_seconds == b.timeout_seconds;
  }
};

struct Measurement {
  double statistic = 0.0;
  std::vector<double> samples;
};

inline double aggregate(std::vector<double> samples, Statistic s) {
  if (samples.empty())
    throw TuneError("no samples to aggregate");
  std::sort(samples.begin(), samples.end());
  if (s == Statistic::minimum)
    return samples.front();
  const auto n = samples.size();
  return n % 2 ? samples[n / 2] : 0.5 * (samples[n / 2 - 1] + samples[n / 2]);
}

/// Runs `protocol.warmup` untimed repetitions, then `protocol.repetitions`
/// timed ones. A repetition longer than the timeout raises VariantTimeout
/// once it returns (the runnable is not interrupted); an exception from the
/// runnable raises VariantCrashed.
inline Measurement measure(const std::function<void()> &runnable,
                           const MeasurementProtocol &protocol) {
  if (protocol.repetitions < 1 || protocol.warmup < 0)
    throw TuneError("measurement protocol needs repetitions >= 1 and warmup >= 0");
  if (!(protocol.timeout_seconds > 0))
    throw TuneError("measurement protocol needs a positive timeout");
  const auto now = protocol.clock ? protocol.clock : [] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
        .count();
  };
  auto run_once = [&]() -> double {
    const double t0 = now();
    try {
      runnable();
    } catch (const std::exception &e) {
      throw VariantCrashed(e.what());
    } catch (...) {
      throw VariantCrashed("unknown exception");
    }
    const double dt = now() - t0;
    if (dt > protocol.timeout_seconds)
      throw VariantTimeout("repetition took " + std::to_string(dt) + " s, limit " +
                           std::to_string(protocol.timeout_seconds) + " s");
    return dt;
  };
  for (int k = 0; k < protocol.warmup; ++k)
    run_once();
  Measurement m;
  for (int k = 0; k < protocol.repetitions; ++k)
    m.samples.push_back(run_once());
  m.statistic = aggregate(m.samples, protocol.statistic);
  return m;
}

enum class EntryStatus { ok, failed, timeout, pruned };

inline std::string_view to_string(EntryStatus s) {
  switch (s) {
  case EntryStatus::ok: return "ok";
  case EntryStatus::failed: return "failed";
  case EntryStatus::timeout: return "timeout";
  case EntryStatus::pruned: return "pruned";
  }
  return "?";
}

inline EntryStatus status_from_string(std::string_view s) {
  if (s == "ok") return EntryStatus::ok;
  if (s == "timeout") return EntryStatus::timeout;
  if (s == "pruned") return EntryStatus::pruned;
  return EntryStatus::failed;
}

struct TuneEntry {
  Assignment assignment;
  EntryStatus status = EntryStatus::ok;
  double statistic = std::numeric_limits<double>::infinity();
  std::vector<double> samples;
  std::string reason;

  friend bool operator==(const TuneEntry &, const TuneEntry &) = default;
};

struct PruneRule {
  bool enabled = true;
  double factor = 3.0;
};

/// Drops remaining assignments that share an axis value whose completed
/// measurements are all slower than `factor` times the best so far.
inline std::vector<Assignment> prune(const std::vector<TuneEntry> &completed,
                                     const std::vector<Assignment> &remaining,
                                     const PruneRule &rule = {}) {
  if (!rule.enabled)
    return remaining;
  double best = std::numeric_limits<double>::infinity();
  for (const auto &e : completed)
    if (e.status == EntryStatus::ok)
      best = std::min(best, e.statistic);
  if (!std::isfinite(best))
    return remaining;
  const double limit = rule.factor * best;

  // (axis, value) pairs with at least one measurement within the limit, and
  // pairs that have been measured at all.
  std::set<std::pair<std::string, std::string>> measured, good;
  for (const auto &e : completed) {
    if (e.status != EntryStatus::ok)
      continue;
    for (const auto &[axis, v] : e.assignment.items()) {
      std::pair<std::string, std::string> key{axis, to_string(v)};
      measured.insert(key);
      if (e.statistic <= limit)
        good.insert(key);
    }
  }
  std::vector<Assignment> kept;
  for (const auto &a : remaining) {
    bool drop = false;
    for (const auto &[axis, v] : a.items()) {
      std::pair<std::string, std::string> key{axis, to_string(v)};
      if (measured.count(key) && !good.count(key)) {
        drop = true;
        break;
      }
    }
    if (!drop)
      kept.push_back(a);
  }
  return kept;
}

/// Identifies a tuning problem: the kernel (by digest of its generating
/// inputs) and the class of input shapes it is tuned for.
struct ProblemKey {
  std::string kernel_digest;
  std::string shape_class;

  std::string str() const {
    std::string s = kernel_digest + "-" + shape_class;
    for (auto &c : s)
      if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.' ||
            c == '='))
        c = '_';
    return s;
  }
  friend bool operator==(const ProblemKey &, const ProblemKey &) = default;
};

inline constexpr int kTuneSchemaVersion = 1;

struct TuneResult {
  Assignment best;
  double best_statistic = 0.0;
  std::vector<TuneEntry> table;
  std::vector<Axis> space;
  MeasurementProtocol protocol;
  jit::PlatformFingerprint platform;
  ProblemKey problem;
  std::string toolkit_version;
  std::int64_t timestamp = 0;

  // Not persisted: how this result was obtained.
  bool cached = false;
  std::size_t measurements = 0;

  nlohmann::json to_json() const {
    auto axes = nlohmann::json::array();
    for (const auto &a : space) {
      auto vals = nlohmann::json::array();
      for (const auto &v : a.values)
        vals.push_back(autotune::to_json(v));
      axes.push_back({{"name", a.name}, {"values", vals}});
    }
    auto rows = nlohmann::json::array();
    for (const auto &e : table)
      rows.push_back({{"assignment", e.assignment.to_json()},
                      {"status", to_string(e.status)},
                      {"statistic", std::isfinite(e.statistic) ? nlohmann::json(e.statistic)
                                                               : nlohmann::json(nullptr)},
                      {"samples", e.samples},
                      {"reason", e.reason}});
    return {{"schema", kTuneSchemaVersion},
            {"best", best.to_json()},
            {"best_statistic", best_statistic},
            {"table", rows},
            {"space", axes},
            {"protocol", protocol.to_json()},
            {"platform", platform.to_json()},
            {"problem", {{"kernel_digest", problem.kernel_digest},
                         {"shape_class", problem.shape_class}}},
            {"toolkit_version", toolkit_version},
            {"timestamp", timestamp}};
  }

  static TuneResult from_json(const nlohmann::json &j) {
    if (j.at("schema").get<int>() != kTuneSchemaVersion)
      throw TuneError("unsupported tune result schema");
    TuneResult r;
    r.best = Assignment::from_json(j.at("best"));
    r.best_statistic = j.at("best_statistic").get<double>();
    for (const auto &row : j.at("table")) {
      TuneEntry e;
      e.assignment = Assignment::from_json(row.at("assignment"));
      e.status = status_from_string(row.at("status").get<std::string>());
      if (!row.at("statistic").is_null())
        e.statistic = row.at("statistic").get<double>();
      e.samples = row.at("samples").get<std::vector<double>>();
      e.reason = row.at("reason").get<std::string>();
      r.table.push_back(std::move(e));
    }
    for (const auto &a : j.at("space")) {
      Axis axis{a.at("name").get<std::string>(), {}};
      for (const auto &v : a.at("values"))
        axis.values.push_back(param_from_json(v));
      r.space.push_back(std::move(axis));
    }
    r.protocol = MeasurementProtocol::from_json(j.at("protocol"));
    r.platform = jit::PlatformFingerprint::from_json(j.at("platform"));
    r.problem = {j.at("problem").at("kernel_digest").get<std::string>(),
                 j.at("problem").at("shape_class").get<std::string>()};
    r.toolkit_version = j.at("toolkit_version").get<std::string>();
    r.timestamp = j.at("timestamp").get<std::int64_t>();
    return r;
  }

  /// Compares the persisted fields.
  friend bool operator==(const TuneResult &a, const TuneResult &b) {
    return a.best == b.best && a.best_statistic == b.best_statistic && a.table == b.table &&
           a.space == b.space && a.protocol == b.protocol && a.platform == b.platform &&
           a.problem == b.problem && a.toolkit_version == b.toolkit_version &&
           a.timestamp == b.timestamp;
  }
};

/// Tuning results on disk: `<root>/<fingerprint digest>/<problem key>.json`.
class TuneStore {
public:
  explicit TuneStore(std::filesystem::path root) : root_(std::move(root)) {}

  const std::filesystem::path &root() const noexcept { return root_; }

  std::filesystem::path path_for(const jit::PlatformFingerprint &fp, const ProblemKey &key) const {
    return root_ / fp.digest() / (key.str() + ".json");
  }

  /// A stored result for this platform, problem and toolkit version.
  /// Unreadable or mismatching files count as absent.
  std::optional<TuneResult> load(const jit::PlatformFingerprint &fp, const ProblemKey &key) const {
    const auto p = path_for(fp, key);
    std::error_code ec;
    if (!std::filesystem::exists(p, ec))
      return std::nullopt;
    try {
      auto r = TuneResult::from_json(nlohmann::json::parse(detail::read_file(p)));
      if (r.platform != fp || r.problem != key || r.toolkit_version != kToolkitVersion)
        return std::nullopt;
      return r;
    } catch (const std::exception &) {
      return std::nullopt;
    }
  }

  void save(const TuneResult &r) const {
    detail::atomic_write_file(path_for(r.platform, r.problem), r.to_json().dump(2));
  }

private:
  std::filesystem::path root_;
};

struct TuneOptions {
  PruneRule pruning{};
  std::optional<std::size_t> sample; // measure a uniform random subset
  std::uint64_t seed = 0;
};

using Runnable = std::function<void()>;
using VariantFactory = std::function<Runnable(const Assignment &)>;

inline bool covers(const TuneResult &r, const std::vector<Assignment> &candidates) {
  if (r.table.size() != candidates.size())
    return false;
  for (std::size_t k = 0; k < candidates.size(); ++k)
    if (r.table[k].assignment != candidates[k])
      return false;
  return true;
}

/// Returns the stored result for (platform, problem, candidates, protocol)
/// if there is one; otherwise measures every candidate in enumeration order,
/// one at a time, and persists the fastest. Ties go to the earlier assignment.
inline TuneResult tune(const VariantFactory &factory, const ParamSpace &space,
                       const MeasurementProtocol &protocol, const TuneStore &store,
                       const jit::PlatformFingerprint &platform, const ProblemKey &problem,
                       const TuneOptions &options = {}) {
  auto candidates = enumerate(space);
  if (options.sample && *options.sample < candidates.size()) {
    std::vector<Assignment> picked;
    std::mt19937_64 rng(options.seed);
    std::sample(candidates.begin(), candidates.end(), std::back_inserter(picked), *options.sample,
                rng);
    candidates = std::move(picked);
  }

  // A stored result answers this campaign only if it covered the same
  // candidates under the same protocol.
  if (auto hit = store.load(platform, problem); hit && hit->space == space.axes &&
                                                 hit->protocol == protocol &&
                                                 covers(*hit, candidates)) {
    hit->cached = true;
    hit->measurements = 0;
    return *hit;
  }

  TuneResult r;
  r.space = space.axes;
  r.protocol = protocol;
  r.platform = platform;
  r.problem = problem;
  r.toolkit_version = std::string(kToolkitVersion);

  std::vector<Assignment> remaining = candidates;
  std::vector<TuneEntry> completed;
  for (const auto &a : candidates) {
    TuneEntry e;
    e.assignment = a;
    if (std::find(remaining.begin(), remaining.end(), a) == remaining.end()) {
      e.status = EntryStatus::pruned;
      e.reason = "pruned";
      r.table.push_back(std::move(e));
      continue;
    }
    remaining.erase(std::find(remaining.begin(), remaining.end(), a));
    try {
      auto run = factory(a);
      ++r.measurements;
      auto m = measure(run, protocol);
      e.statistic = m.statistic;
      e.samples = std::move(m.samples);
    } catch (const VariantTimeout &ex) {
      e.status = EntryStatus::timeout;
      e.reason = ex.what();
    } catch (const std::exception &ex) {
      e.status = EntryStatus::failed;
      e.reason = ex.what();
    }
    if (e.status == EntryStatus::ok) {
      completed.push_back(e);
      remaining = prune(completed, remaining, options.pruning);
    }
    r.table.push_back(std::move(e));
  }

  const TuneEntry *best = nullptr;
  for (const auto &e : r.table)
    if (e.status == EntryStatus::ok && (!best || e.statistic < best->statistic))
      best = &e;
  if (!best) {
    std::vector<std::string> reasons;
    for (const auto &e : r.table)
      reasons.push_back(e.assignment.to_string() + ": " + e.reason);
    throw AllVariantsFailed(std::move(reasons));
  }
  r.best = best->assignment;
  r.best_statistic = best->statistic;
  r.timestamp = detail::unix_now();
  store.save(r);
  return r;
}

} // namespace rtcg::autotune

#endif // RTCG_AUTOTUNE_HPP
