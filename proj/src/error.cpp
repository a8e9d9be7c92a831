#include "sparsecv/error.hpp"

namespace sparsecv {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return "invalid-argument";
    case ErrorKind::kInvalidLabel: return "invalid-label";
    case ErrorKind::kIndexOutOfRange: return "index-out-of-range";
    case ErrorKind::kNonDifferentiableRegularizer: return "non-differentiable-regularizer";
    case ErrorKind::kNoConvergence: return "no-convergence";
    case ErrorKind::kSingularHessian: return "singular-hessian";
    case ErrorKind::kSingularRestrictedHessian: return "singular-restricted-hessian";
    case ErrorKind::kSingularDowndate: return "singular-downdate";
    case ErrorKind::kSupportTooLarge: return "support-too-large";
    case ErrorKind::kIncompleteLooSet: return "incomplete-loo-set";
    case ErrorKind::kDivisionByZero: return "division-by-zero";
    case ErrorKind::kDivergence: return "divergence-detected";
    case ErrorKind::kAlphaExceeded: return "alpha-exceeded";
    case ErrorKind::kParseError: return "parse-error";
    case ErrorKind::kLabelDomain: return "label-domain";
    case ErrorKind::kIoError: return "io-error";
  }
  return "unknown";
}

}  // namespace sparsecv
