#pragma once

#include <stdexcept>
#include <string>

namespace metastab {

enum class ErrorCode {
  InvalidArgument,
  InvalidDimension,
  InvalidSize,
  InvalidPerturbation,
  DimensionMismatch,
  EmptyBatch,
  InvalidWeights,
  Divergence,
  NonConvergence,
  Premise,
  NotRecorded,
  Unsupported,
  Io,
  Parse,
};

inline const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid-argument";
    case ErrorCode::InvalidDimension: return "invalid-dimension";
    case ErrorCode::InvalidSize: return "invalid-size";
    case ErrorCode::InvalidPerturbation: return "invalid-perturbation";
    case ErrorCode::DimensionMismatch: return "dimension-mismatch";
    case ErrorCode::EmptyBatch: return "empty-batch";
    case ErrorCode::InvalidWeights: return "invalid-weights";
    case ErrorCode::Divergence: return "divergence";
    case ErrorCode::NonConvergence: return "non-convergence";
    case ErrorCode::Premise: return "premise-violation";
    case ErrorCode::NotRecorded: return "not-recorded";
    case ErrorCode::Unsupported: return "unsupported";
    case ErrorCode::Io: return "io";
    case ErrorCode::Parse: return "parse";
  }
  return "unknown";
}

/// Exception carrying a machine-readable code; the C API maps it onto ms_status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Raised when an iterate stops being finite.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, long round, long user = -1, long local_step = -1)
      : Error(ErrorCode::Divergence, what), round_(round), user_(user), local_step_(local_step) {}
  long round() const noexcept { return round_; }
  long user() const noexcept { return user_; }
  long local_step() const noexcept { return local_step_; }

 private:
  long round_;
  long user_;
  long local_step_;
};

class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& what, double residual)
      : Error(ErrorCode::NonConvergence, what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool condition, ErrorCode code, const std::string& what) {
  if (!condition) fail(code, what);
}

}  // namespace metastab
