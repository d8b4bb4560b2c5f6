#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fbsde {

enum class ErrorCode {
  InvalidConfig,
  SingularDiffusion,
  OddN,
  TooFewNodes,
  OrderOutOfRange,
  NonFiniteSample,
  MissingDerivative,
  PicardDiverged,
  DegenerateParameters,
  BoxTouchesZero,
  InsufficientPoints,
  NonPositiveError,
  IoFailure,
};

std::string_view error_name(ErrorCode code);

/// Every failure raised by the library. The CLI prints `name()` on stderr.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const { return code_; }
  std::string_view name() const { return error_name(code_); }

 private:
  ErrorCode code_;
};

}  // namespace fbsde
