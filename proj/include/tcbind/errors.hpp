#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tcbind {

enum class ErrorKind {
  // parameter validation
  InvalidParameter,
  ConstraintNotBinding,
  DegenerateConstraint,
  // geometry / closed forms
  SingularRatio,
  SignError,
  DomainError,
  BranchUndefined,
  RequiresLimitForm,
  PoleEncountered,
  // root finding
  NoBracket,
  ToleranceNotReached,
  NoSolution,
  NegativeRadicand,
  // simulation
  NonpositiveWealth,
  SpreadViolation,
  NumericalBlowup,
};

/// Coarse grouping used by the CLI to pick an exit code.
enum class ErrorClass { Validation, Solver, Simulation };

std::string_view to_string(ErrorKind kind) noexcept;
ErrorClass classify_error(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace tcbind
