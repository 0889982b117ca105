// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 dacsfl contributors

#include "dacsfl/common.hpp"

namespace dacsfl {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::Parse: return "parse error";
    case ErrorCode::UnknownIdentifier: return "unknown identifier";
    case ErrorCode::Schema: return "schema error";
    case ErrorCode::Dimension: return "dimension mismatch";
    case ErrorCode::Certification: return "certification failure";
    case ErrorCode::Singular: return "singular evaluation";
    case ErrorCode::Numerical: return "numerical failure";
    case ErrorCode::Io: return "i/o error";
    case ErrorCode::Argument: return "invalid argument";
    case ErrorCode::NotSupported: return "not supported";
  }
  return "error";
}

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "PASS";
    case Verdict::Fail: return "FAIL";
    case Verdict::Undecided: return "UNDECIDED";
  }
  return "UNDECIDED";
}

Verdict combine(Verdict a, Verdict b) {
  if (a == Verdict::Fail || b == Verdict::Fail) return Verdict::Fail;
  if (a == Verdict::Undecided || b == Verdict::Undecided) return Verdict::Undecided;
  return Verdict::Pass;
}

}  // namespace dacsfl
