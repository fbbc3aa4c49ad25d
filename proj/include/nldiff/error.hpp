// SPDX-FileCopyrightText: Copyright (c) 2026 nldiff contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nldiff {

enum class ErrorCode {
  InvalidArgument,
  IterationLimitExceeded,
  NonFiniteEnergy,
  NotConverged,
  EmptyObservation,
  GridTooLarge,
  SingularSystem,
  ShapeMismatch,
  MalformedHeader,
  UnsupportedMaxval,
  TruncatedData,
  IoFailure,
};

const char* to_string(ErrorCode code) noexcept;

/// Base exception for every failure raised by the library. `step()` is the
/// 1-based index of the evolution step that failed, or -1 when the failure is
/// not tied to a step.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what, int step = -1)
      : std::runtime_error(what), code_(code), step_(step) {}

  ErrorCode code() const noexcept { return code_; }
  int step() const noexcept { return step_; }

 private:
  ErrorCode code_;
  int step_;
};

/// Parse failure inside a file; carries the byte offset where parsing stopped.
class ParseError : public Error {
 public:
  ParseError(ErrorCode code, const std::string& what, std::size_t offset)
      : Error(code, what + " (at byte offset " + std::to_string(offset) + ")"),
        detail_(what),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }
  /// The message without the offset suffix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::string detail_;
  std::size_t offset_;
};

/// Rethrows `e` with the failing step index attached.
[[noreturn]] void rethrow_at_step(const Error& e, int step);

}  // namespace nldiff
