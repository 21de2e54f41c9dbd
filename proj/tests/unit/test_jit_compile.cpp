// Copyright 2026 The rtcg-kit Authors
// SPDX-License-Identifier: Apache-2.0

#include <thread>

#include <sys/wait.h>
#include <unistd.h>

#include <gtest/gtest.h>

#include "support.hpp"

using namespace rtcg;
using rtcg::testing::TempDir;

namespace {

const char *kTriple = R"(void triple(void **args, long start, long end)
{
    int *x = (int *)args[0];
    for (long i = start; i < end; ++i) {
        x[i] *= 3;
    }
}
)";

struct JitFixture : ::testing::Test {
  TempDir dir;
  jit::ToolchainConfig config = jit::ToolchainConfig::detect("cc");
  jit::CacheStore cache{dir.path() / "cache"};
};

} // namespace

TEST_F(JitFixture, CompileLoadAndRun) {
  const auto mod = jit::compile(kTriple, config, cache);
  EXPECT_FALSE(mod.cache_hit());
  const auto k = mod.get_kernel("triple");
  int data[5] = {1, 2, 3, 4, 5};
  void *args[] = {data};
  k(args, 1, 4);
  EXPECT_EQ(data[0], 1);
  EXPECT_EQ(data[1], 6);
  EXPECT_EQ(data[3], 12);
  EXPECT_EQ(data[4], 5);
  k(args, 3, 3); // empty range
  EXPECT_EQ(data[3], 12);
}

TEST_F(JitFixture, SecondCompileIsACacheHitWithoutSpawning) {
  jit::compile(kTriple, config, cache);
  const auto spawned = jit::compiler_invocations();
  const auto again = jit::compile(kTriple, config, cache);
  EXPECT_TRUE(again.cache_hit());
  EXPECT_EQ(jit::compiler_invocations(), spawned);
  EXPECT_EQ(cache.stats().entries, 1u);
}

TEST_F(JitFixture, EntryFilesAndMetadata) {
  const auto mod = jit::compile(kTriple, config, cache);
  const auto dir = cache.entry_dir(mod.key());
  for (const char *f : {"source.c", "module.bin", "meta.json", "compile.log"})
    EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
  EXPECT_EQ(detail::read_file(dir / "source.c"), kTriple);
  const auto meta = nlohmann::json::parse(detail::read_file(dir / "meta.json"));
  EXPECT_EQ(meta.at("schema"), jit::kMetaSchemaVersion);
  EXPECT_EQ(meta.at("key"), mod.key().digest);
  EXPECT_EQ(meta.at("source_digest"), detail::sha256_hex(kTriple));
  EXPECT_EQ(meta.at("binary_digest"), detail::sha256_hex(detail::read_file(dir / "module.bin")));
  EXPECT_EQ(meta.at("flags").get<std::vector<std::string>>(), config.flags);
  EXPECT_EQ(meta.at("toolchain_id"), config.identity);
  EXPECT_EQ(jit::PlatformFingerprint::from_json(meta.at("fingerprint")), jit::fingerprint(config));
  EXPECT_GT(meta.at("created_unix").get<std::int64_t>(), 0);
}

TEST_F(JitFixture, ProvenanceRecordsInputs) {
  const auto mod = jit::compile(kTriple, config, cache);
  EXPECT_EQ(mod.provenance().source, kTriple);
  EXPECT_EQ(mod.provenance().flags, config.flags);
  EXPECT_EQ(mod.provenance().toolchain_id, config.identity);
  EXPECT_GT(mod.provenance().seconds, 0.0);
}

TEST_F(JitFixture, WarningsArePreservedInTheLog) {
  const std::string src = "void w(void **args, long start, long end) { int unused; }\n";
  const auto mod = jit::compile(src, config, cache);
  EXPECT_NE(mod.provenance().compiler_output.find("unused"), std::string::npos);
  const auto again = jit::compile(src, config, cache);
  EXPECT_TRUE(again.cache_hit());
  EXPECT_EQ(again.provenance().compiler_output, mod.provenance().compiler_output);
}

TEST_F(JitFixture, CompileErrorCarriesDiagnosticsAndNumberedSource) {
  const std::string src = "void broken(void **args, long start, long end)\n{\n    int x = ;\n}\n";
  try {
    jit::compile(src, config, cache);
    FAIL() << "expected CompileError";
  } catch (const CompileError &e) {
    EXPECT_NE(e.diagnostics().find("error"), std::string::npos);
    EXPECT_NE(e.numbered_source().find("   3:     int x = ;"), std::string::npos);
    EXPECT_NE(e.exit_code(), 0);
    EXPECT_FALSE(e.timed_out());
    EXPECT_NE(std::string(e.what()).find("int x = ;"), std::string::npos);
  }
  EXPECT_EQ(cache.stats().entries, 0u); // failures are not cached
}

TEST_F(JitFixture, EmptySourceIsRejected) {
  EXPECT_THROW(jit::compile("", config, cache), JitError);
}

TEST_F(JitFixture, MissingSymbol) {
  const auto mod = jit::compile(kTriple, config, cache);
  EXPECT_THROW(mod.get_kernel("quadruple"), SymbolNotFound);
}

TEST_F(JitFixture, CorruptBinaryIsQuarantinedAndRebuilt) {
  // The module is released first: rewriting a mapped library in place would
  // crash this process rather than exercise the cache.
  const auto key = jit::compile(kTriple, config, cache).key();
  const auto bin = cache.entry_dir(key) / "module.bin";
  auto bytes = detail::read_file(bin);
  bytes[bytes.size() / 2] ^= 0x5a;
  detail::write_file(bin, bytes);
  EXPECT_THROW(cache.validate(key), CacheCorrupt);

  const auto spawned = jit::compiler_invocations();
  const auto rebuilt = jit::compile(kTriple, config, cache);
  EXPECT_FALSE(rebuilt.cache_hit());
  EXPECT_EQ(jit::compiler_invocations(), spawned + 1);
  EXPECT_EQ(cache.quarantined(), 1u);
  EXPECT_TRUE(std::filesystem::exists(cache.root() / "quarantine"));
  EXPECT_NO_THROW(cache.validate(rebuilt.key()));
}

TEST_F(JitFixture, TamperedSourceAndMetaAreCorrupt) {
  const auto mod = jit::compile(kTriple, config, cache);
  const auto dir = cache.entry_dir(mod.key());
  detail::write_file(dir / "source.c", "/* edited */");
  EXPECT_THROW(cache.validate(mod.key()), CacheCorrupt);
  EXPECT_FALSE(cache.lookup(mod.key()).has_value());

  const auto again = jit::compile(kTriple, config, cache);
  detail::write_file(cache.entry_dir(again.key()) / "meta.json", "{not json");
  EXPECT_FALSE(cache.lookup(again.key()).has_value());
  EXPECT_EQ(cache.quarantined(), 2u);
}

TEST_F(JitFixture, ConcurrentCompilesOfOneKeySpawnOnce) {
  const std::string src = std::string(kTriple) + "/* concurrency */\n";
  const auto spawned = jit::compiler_invocations();
  std::vector<std::jthread> threads;
  std::atomic<int> ok{0};
  for (int t = 0; t < 6; ++t)
    threads.emplace_back([&] {
      const auto m = jit::compile(src, config, cache);
      if (m.get_kernel("triple"))
        ++ok;
    });
  threads.clear();
  EXPECT_EQ(ok.load(), 6);
  EXPECT_EQ(jit::compiler_invocations(), spawned + 1);
}

TEST_F(JitFixture, SeparateProcessesShareTheCache) {
  const std::string src = std::string(kTriple) + "/* processes */\n";
  const auto spawned = jit::compiler_invocations();
  std::vector<pid_t> kids;
  for (int k = 0; k < 3; ++k) {
    const pid_t pid = ::fork();
    ASSERT_GE(pid, 0);
    if (pid == 0) {
      try {
        jit::CacheStore child_cache(cache.root());
        jit::compile(src, config, child_cache).get_kernel("triple");
        ::_exit(0);
      } catch (...) {
        ::_exit(1);
      }
    }
    kids.push_back(pid);
  }
  for (pid_t pid : kids) {
    int status = 0;
    ::waitpid(pid, &status, 0);
    EXPECT_TRUE(WIFEXITED(status) && WEXITSTATUS(status) == 0);
  }
  EXPECT_EQ(jit::compiler_invocations(), spawned); // all work happened in the children
  const auto mod = jit::compile(src, config, cache);
  EXPECT_TRUE(mod.cache_hit());
  EXPECT_EQ(cache.stats().entries, 1u);
}

TEST_F(JitFixture, StatsClearAndPrune) {
  jit::compile(kTriple, config, cache);
  jit::compile(std::string(kTriple) + "\n", config, cache);
  auto s = cache.stats();
  EXPECT_EQ(s.entries, 2u);
  EXPECT_GT(s.bytes, 0u);
  ASSERT_TRUE(s.oldest_unix && s.newest_unix);
  EXPECT_LE(*s.oldest_unix, *s.newest_unix);

  EXPECT_EQ(cache.prune(std::chrono::hours(1)), 0u);
  EXPECT_EQ(cache.stats().entries, 2u);
  EXPECT_EQ(cache.prune(std::chrono::seconds(0)), 2u);
  EXPECT_EQ(cache.stats().entries, 0u);

  jit::compile(kTriple, config, cache);
  EXPECT_EQ(cache.clear(), 1u);
  EXPECT_EQ(cache.stats().entries, 0u);
}

TEST_F(JitFixture, CompilerTimeoutIsReported) {
  const auto slow = rtcg::testing::write_executable(
      dir.path() / "slowcc",
      "#!/bin/sh\nif [ \"$1\" = \"--version\" ]; then echo slowcc; exit 0; fi\nsleep 5\n");
  auto cfg = jit::ToolchainConfig::detect(slow.string());
  cfg.timeout = std::chrono::milliseconds(200);
  try {
    jit::compile(kTriple, cfg, cache);
    FAIL() << "expected CompileError";
  } catch (const CompileError &e) {
    EXPECT_TRUE(e.timed_out());
  }
}

TEST_F(JitFixture, ChangingFlagsRecompiles) {
  jit::compile(kTriple, config, cache);
  auto other = config;
  other.flags.push_back("-DVARIANT=2");
  const auto spawned = jit::compiler_invocations();
  const auto mod = jit::compile(kTriple, other, cache);
  EXPECT_FALSE(mod.cache_hit());
  EXPECT_EQ(jit::compiler_invocations(), spawned + 1);
}

TEST(NumberLines, Format) {
  EXPECT_EQ(jit::number_lines("a\nb\n"), "   1: a\n   2: b\n");
  EXPECT_EQ(jit::number_lines("x"), "   1: x\n");
}
