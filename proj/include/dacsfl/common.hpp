// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 dacsfl contributors

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace dacsfl {

enum class ErrorCode {
  Parse = 1,
  UnknownIdentifier,
  Schema,
  Dimension,
  Certification,
  Singular,
  Numerical,
  Io,
  Argument,
  NotSupported,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

enum class Verdict { Pass = 0, Fail = 1, Undecided = 2 };

const char* verdict_name(Verdict v);

// Combines verdicts: any Fail wins, then any Undecided.
Verdict combine(Verdict a, Verdict b);

struct Settings {
  std::uint64_t seed = 1;
  double radius = 0.1;
  double tol_zero = 1e-10;
  double tol_nonzero = 1e-8;
  double tol_rank = 1e-8;
  double tol_residual = 1e-8;
  int zero_samples = 64;
  int rank_samples = 16;
  int verify_samples = 32;
  double step = 1e-4;
  double horizon = 0.5;
};

}  // namespace dacsfl
