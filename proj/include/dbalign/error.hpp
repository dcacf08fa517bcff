#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dbalign {

enum class ErrorKind {
  DimensionMismatch,
  NotPositiveDefinite,
  AsymmetryBeyondTolerance,
  PerfectCorrelation,
  NonFiniteInput,
  NonFiniteScore,
  InstanceTooLarge,
  IdentifierMismatch,
  InvalidArgument,
  ParseError,
  IoError,
};

std::string_view to_string(ErrorKind kind);

// Validation kinds map to CLI exit code 2, everything else to 1.
bool is_validation_error(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace dbalign
