#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sparsecv {

enum class ErrorKind {
  kInvalidArgument,
  kInvalidLabel,
  kIndexOutOfRange,
  kNonDifferentiableRegularizer,
  kNoConvergence,
  kSingularHessian,
  kSingularRestrictedHessian,
  kSingularDowndate,
  kSupportTooLarge,
  kIncompleteLooSet,
  kDivisionByZero,
  kDivergence,
  kAlphaExceeded,
  kParseError,
  kLabelDomain,
  kIoError,
};

/// Stable machine-readable name, e.g. "singular-downdate".
std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace sparsecv
