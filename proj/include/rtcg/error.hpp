// Copyright 2026 The rtcg-kit Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef RTCG_ERROR_HPP
#define RTCG_ERROR_HPP

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace rtcg {

/// Base class of every error raised by the toolkit.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

#define RTCG_DEFINE_ERROR(Name, Base)                                          \
  class Name : public Base {                                                   \
  public:                                                                      \
    using Base::Base;                                                          \
  }

// csyntax
RTCG_DEFINE_ERROR(TemplateError, Error);
RTCG_DEFINE_ERROR(UnboundPlaceholder, TemplateError);
RTCG_DEFINE_ERROR(MalformedPlaceholder, TemplateError);
RTCG_DEFINE_ERROR(UnboundVariable, TemplateError);
RTCG_DEFINE_ERROR(NonIntegerBound, TemplateError);
RTCG_DEFINE_ERROR(UnclosedBlock, TemplateError);
RTCG_DEFINE_ERROR(TemplateSyntaxError, TemplateError);

class IllFormedTree : public Error {
public:
  IllFormedTree(std::string path, const std::string &what)
      : Error("ill-formed syntax tree at " + path + ": " + what),
        path_(std::move(path)) {}
  const std::string &path() const noexcept { return path_; }

private:
  std::string path_;
};

// jit
RTCG_DEFINE_ERROR(JitError, Error);
RTCG_DEFINE_ERROR(LoadError, JitError);
RTCG_DEFINE_ERROR(CacheCorrupt, JitError);
RTCG_DEFINE_ERROR(SymbolNotFound, JitError);
RTCG_DEFINE_ERROR(ToolchainError, JitError);

/// Raised when the C compiler rejects a source. Carries the compiler's
/// stderr verbatim and the source with line numbers prepended.
class CompileError : public JitError {
public:
  CompileError(std::string diagnostics, std::string numbered_source,
               int exit_code, bool timed_out)
      : JitError(format(diagnostics, numbered_source, exit_code, timed_out)),
        diagnostics_(std::move(diagnostics)),
        numbered_source_(std::move(numbered_source)), exit_code_(exit_code),
        timed_out_(timed_out) {}

  const std::string &diagnostics() const noexcept { return diagnostics_; }
  const std::string &numbered_source() const noexcept {
    return numbered_source_;
  }
  int exit_code() const noexcept { return exit_code_; }
  bool timed_out() const noexcept { return timed_out_; }

private:
  static std::string format(const std::string &diag, const std::string &src,
                            int code, bool timed_out) {
    std::string msg = timed_out ? "compiler timed out"
                                : "compilation failed (exit code " +
                                      std::to_string(code) + ")";
    msg += "\n--- compiler output ---\n" + diag;
    msg += "\n--- source ---\n" + src;
    return msg;
  }

  std::string diagnostics_;
  std::string numbered_source_;
  int exit_code_;
  bool timed_out_;
};

// ndarray
RTCG_DEFINE_ERROR(OutOfMemory, Error);
RTCG_DEFINE_ERROR(LengthMismatch, Error);
RTCG_DEFINE_ERROR(ShapeMismatch, Error);
RTCG_DEFINE_ERROR(DivisionByZero, Error);

// elementwise / reduction
RTCG_DEFINE_ERROR(ParseError, Error);
RTCG_DEFINE_ERROR(UnknownType, ParseError);
RTCG_DEFINE_ERROR(ArityMismatch, Error);
RTCG_DEFINE_ERROR(DtypeMismatch, Error);
RTCG_DEFINE_ERROR(InvalidVariant, Error);
RTCG_DEFINE_ERROR(NonScalarResult, Error);
RTCG_DEFINE_ERROR(InvalidNeutral, Error);

// autotune
RTCG_DEFINE_ERROR(TuneError, Error);
RTCG_DEFINE_ERROR(EmptySpace, TuneError);
RTCG_DEFINE_ERROR(VariantTimeout, TuneError);
RTCG_DEFINE_ERROR(VariantCrashed, TuneError);

class AllVariantsFailed : public TuneError {
public:
  explicit AllVariantsFailed(std::vector<std::string> reasons)
      : TuneError(format(reasons)), reasons_(std::move(reasons)) {}
  const std::vector<std::string> &reasons() const noexcept { return reasons_; }

private:
  static std::string format(const std::vector<std::string> &reasons) {
    std::string msg = "all variants failed:";
    for (const auto &r : reasons)
      msg += "\n  " + r;
    return msg;
  }
  std::vector<std::string> reasons_;
};

#undef RTCG_DEFINE_ERROR

} // namespace rtcg

#endif // RTCG_ERROR_HPP
