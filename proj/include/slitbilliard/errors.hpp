#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace slitbilliard {

enum class ErrorCode {
  InvalidConfig,
  SingularHit,
  Grazing,
  StencilCrossesSingularity,
  QuadratureFailure,
  WrongChamberSign,
  NoConvergence,
  NotInStrip,
  NearBranchBoundary,
  BranchMismatch,
  BelowValidity,
  InsufficientSamples,
  NotTrapping,
  NotHyperbolic,
  ParseError,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so
/// drivers can map it onto an exit status without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

  /// True for failures of the numerics (as opposed to bad input).
  bool numeric() const noexcept {
    return code_ == ErrorCode::SingularHit || code_ == ErrorCode::Grazing ||
           code_ == ErrorCode::StencilCrossesSingularity ||
           code_ == ErrorCode::QuadratureFailure || code_ == ErrorCode::NoConvergence;
  }

 private:
  ErrorCode code_;
};

}  // namespace slitbilliard
