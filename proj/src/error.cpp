#include "fluxreg/error.hpp"

namespace fluxreg {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::QuadratureFailure: return "QuadratureFailure";
    case ErrorCode::DegeneratePair: return "DegeneratePair";
    case ErrorCode::ZeroMatrix: return "ZeroMatrix";
    case ErrorCode::BudgetTooSmall: return "BudgetTooSmall";
    case ErrorCode::VanishingGradient: return "VanishingGradient";
    case ErrorCode::DomainMismatch: return "DomainMismatch";
    case ErrorCode::ExteriorAccess: return "ExteriorAccess";
    case ErrorCode::EmptySamples: return "EmptySamples";
    case ErrorCode::BadConstant: return "BadConstant";
    case ErrorCode::NewtonStall: return "NewtonStall";
    case ErrorCode::LinearSolveFailure: return "LinearSolveFailure";
    case ErrorCode::IncompatibleData: return "IncompatibleData";
    case ErrorCode::ResidualTooLarge: return "ResidualTooLarge";
    case ErrorCode::BallNotInterior: return "BallNotInterior";
    case ErrorCode::ParameterOutOfRange: return "ParameterOutOfRange";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace fluxreg
