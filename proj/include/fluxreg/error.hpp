#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fluxreg {

enum class ErrorCode {
  InvalidArgument,
  IndexOutOfRange,
  QuadratureFailure,
  DegeneratePair,
  ZeroMatrix,
  BudgetTooSmall,
  VanishingGradient,
  DomainMismatch,
  ExteriorAccess,
  EmptySamples,
  BadConstant,
  NewtonStall,
  LinearSolveFailure,
  IncompatibleData,
  ResidualTooLarge,
  BallNotInterior,
  ParameterOutOfRange,
  ConfigError,
  IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace fluxreg
