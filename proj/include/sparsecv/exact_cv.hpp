#pragma once

#include "sparsecv/glm.hpp"
#include "sparsecv/l1_solver.hpp"

#include <optional>
#include <string>
#include <vector>

namespace sparsecv {

enum class LooMethod {
  kExact,
  kNsFull,
  kIjFull,
  kNsRestricted,
  kIjRestricted,
  kIjLissa,
  kSmoothedNs,
  kSmoothedIj,
};

std::string to_string(LooMethod method);
LooMethod loo_method_from_string(const std::string& name);

/// Leave-one-out parameter estimates, one column per left-out point.
struct LooSet {
  LooMethod method = LooMethod::kExact;
  /// D x N; column n holds theta^{\n}. Columns of unavailable folds are zero.
  Matrix thetas;
  /// available[n] != 0 when fold n was computed.
  std::vector<char> available;
  double wall_time = 0.0;
  /// Human-readable reasons for unavailable or unconverged folds.
  std::vector<std::string> failures;

  Index n() const { return thetas.cols(); }
  Index d() const { return thetas.rows(); }
  bool complete() const;
  Vector theta(Index n) const { return thetas.col(n); }
};

/// f(x_n^T theta^{\n}, y_n) for each n in folds, in the given order.
Vector left_out_losses(const Dataset& data, const Matrix& thetas,
                       const std::vector<Index>& folds);

/// Dispatches to fit_l1 or fit_smooth depending on the regularizer.
FitResult fit_model(const Dataset& data, const Regularizer& reg, const SolverConfig& config = {},
                    std::optional<Index> exclude = std::nullopt);

/// Minimizer of (1/N) sum_{m != n} f_m + lambda R, warm-started at `warm`.
FitResult loo_refit(const Dataset& data, const Regularizer& reg, Index n, const Vector& warm,
                    const SolverConfig& config = {});

struct ExactLoo {
  LooSet set;
  /// Mean left-out loss; empty unless every fold converged.
  std::optional<double> loo;
  FitResult full_fit;
  std::vector<char> fold_converged;
};

/// Refits every fold, warm-started at the full-data fit. For smooth
/// regularizers each fold is solved by chord iterations preconditioned with
/// the leave-one-out Hessian at the full-data fit, falling back to Newton.
ExactLoo exact_loocv(const Dataset& data, const Regularizer& reg, const SolverConfig& config = {});
ExactLoo exact_loocv(const Dataset& data, const Regularizer& reg, const SolverConfig& config,
                     const FitResult& full_fit);

struct SubsampledCv {
  double estimate = 0.0;
  /// Sample standard deviation over the k folds divided by sqrt(k); NaN for k = 1.
  double std_error = 0.0;
  /// The sampled folds, sorted.
  std::vector<Index> folds;
  double wall_time = 0.0;
};

/// Mean left-out loss over k folds drawn uniformly without replacement.
/// With k = N the estimate is bit-identical to exact_loocv's loo.
SubsampledCv subsampled_cv(const Dataset& data, const Regularizer& reg, Index k,
                           std::uint64_t seed, const SolverConfig& config = {});
SubsampledCv subsampled_cv(const Dataset& data, const Regularizer& reg, Index k,
                           std::uint64_t seed, const SolverConfig& config,
                           const FitResult& full_fit);

/// Draws k distinct indices from [0, n), sorted.
std::vector<Index> sample_without_replacement(Index n, Index k, std::uint64_t seed);

}  // namespace sparsecv
