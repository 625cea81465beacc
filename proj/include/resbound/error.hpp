#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace resbound {

enum class ErrorKind {
  SyntaxError,
  UnknownIdentifier,
  DomainError,
  UnboundVariable,
  InvalidDomain,
  OverflowError,
  DegreeTooLarge,
  OutOfDomain,
  UnstableSystem,
  NeedExplicitJordan,
  SingularMatrix,
  CoefficientVanishes,
  StagnationPoint,
  NoBoundaryHit,
  NotOnDirichletBoundary,
  StepUnderflow,
  SchemaError,
  MethodMismatch,
};

constexpr std::string_view kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::SyntaxError: return "SyntaxError";
    case ErrorKind::UnknownIdentifier: return "UnknownIdentifier";
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::UnboundVariable: return "UnboundVariable";
    case ErrorKind::InvalidDomain: return "InvalidDomain";
    case ErrorKind::OverflowError: return "OverflowError";
    case ErrorKind::DegreeTooLarge: return "DegreeTooLarge";
    case ErrorKind::OutOfDomain: return "OutOfDomain";
    case ErrorKind::UnstableSystem: return "UnstableSystem";
    case ErrorKind::NeedExplicitJordan: return "NeedExplicitJordan";
    case ErrorKind::SingularMatrix: return "SingularMatrix";
    case ErrorKind::CoefficientVanishes: return "CoefficientVanishes";
    case ErrorKind::StagnationPoint: return "StagnationPoint";
    case ErrorKind::NoBoundaryHit: return "NoBoundaryHit";
    case ErrorKind::NotOnDirichletBoundary: return "NotOnDirichletBoundary";
    case ErrorKind::StepUnderflow: return "StepUnderflow";
    case ErrorKind::SchemaError: return "SchemaError";
    case ErrorKind::MethodMismatch: return "MethodMismatch";
  }
  return "Unknown";
}

/// Single exception type for the library; `kind()` tells callers which
/// precondition or input check failed.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(kind_name(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  std::string_view name() const noexcept { return kind_name(kind_); }

 private:
  ErrorKind kind_;
};

class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t offset, const std::string& what)
      : Error(ErrorKind::SyntaxError, what + " at offset " + std::to_string(offset)),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

}  // namespace resbound
