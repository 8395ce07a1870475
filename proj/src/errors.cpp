#include "tcbind/errors.hpp"

namespace tcbind {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidParameter: return "InvalidParameter";
    case ErrorKind::ConstraintNotBinding: return "ConstraintNotBinding";
    case ErrorKind::DegenerateConstraint: return "DegenerateConstraint";
    case ErrorKind::SingularRatio: return "SingularRatio";
    case ErrorKind::SignError: return "SignError";
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::BranchUndefined: return "BranchUndefined";
    case ErrorKind::RequiresLimitForm: return "RequiresLimitForm";
    case ErrorKind::PoleEncountered: return "PoleEncountered";
    case ErrorKind::NoBracket: return "NoBracket";
    case ErrorKind::ToleranceNotReached: return "ToleranceNotReached";
    case ErrorKind::NoSolution: return "NoSolution";
    case ErrorKind::NegativeRadicand: return "NegativeRadicand";
    case ErrorKind::NonpositiveWealth: return "NonpositiveWealth";
    case ErrorKind::SpreadViolation: return "SpreadViolation";
    case ErrorKind::NumericalBlowup: return "NumericalBlowup";
  }
  return "Unknown";
}

ErrorClass classify_error(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidParameter:
    case ErrorKind::ConstraintNotBinding:
    case ErrorKind::DegenerateConstraint:
    case ErrorKind::NonpositiveWealth:
      return ErrorClass::Validation;
    case ErrorKind::SpreadViolation:
    case ErrorKind::NumericalBlowup:
      return ErrorClass::Simulation;
    default:
      return ErrorClass::Solver;
  }
}

}  // namespace tcbind
