#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hhvix {

enum class ErrorCode {
  DomainViolation,
  NoAdmissibleC,
  AssumptionViolated,
  ShiftOutOfRange,
  SingularShift,
  DegenerateDenominator,
  StepSizeUnderflow,
  ExplosionGuard,
  OutOfGrid,
  NegativeVixSquared,
  QuadratureNotConverged,
  SchemeUnavailable,
  InvalidArgument,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::DomainViolation: return "DomainViolation";
    case ErrorCode::NoAdmissibleC: return "NoAdmissibleC";
    case ErrorCode::AssumptionViolated: return "AssumptionViolated";
    case ErrorCode::ShiftOutOfRange: return "ShiftOutOfRange";
    case ErrorCode::SingularShift: return "SingularShift";
    case ErrorCode::DegenerateDenominator: return "DegenerateDenominator";
    case ErrorCode::StepSizeUnderflow: return "StepSizeUnderflow";
    case ErrorCode::ExplosionGuard: return "ExplosionGuard";
    case ErrorCode::OutOfGrid: return "OutOfGrid";
    case ErrorCode::NegativeVixSquared: return "NegativeVixSquared";
    case ErrorCode::QuadratureNotConverged: return "QuadratureNotConverged";
    case ErrorCode::SchemeUnavailable: return "SchemeUnavailable";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

/// Numerical failures (solver stalls, non-convergence) as opposed to inputs
/// that sit outside the admissible domain.
constexpr bool is_numerical(ErrorCode code) noexcept {
  return code == ErrorCode::DegenerateDenominator || code == ErrorCode::StepSizeUnderflow ||
         code == ErrorCode::ExplosionGuard || code == ErrorCode::QuadratureNotConverged ||
         code == ErrorCode::NegativeVixSquared;
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace hhvix
