#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace specgate {

enum class ErrorCode {
  InvalidArgument,
  DimensionMismatch,
  ZeroDivisorViolation,
  EmptyFamily,
  NoAdmissibleScale,
  GaugeVanishes,
  NotSorted,
  EigenFailure,
  DegenerateFamily,
  InvalidR,
  TailTooLarge,
  DivergentSeries,
  NotSpectral,
  HorizonTooLarge,
  NoDecayCertificate,
  BadConjugate,
  QuadratureBudget,
  SingularSample,
  StripViolation,
  ParseError,
  ValidationError,
};

std::string_view to_string(ErrorCode code) noexcept;

// Every failure the library reports carries one of the codes above so that
// callers (the report writer, the CLI exit-code mapping) can branch on it.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) fail(code, what);
}

}  // namespace specgate
