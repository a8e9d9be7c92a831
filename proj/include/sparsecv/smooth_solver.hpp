#pragma once

#include "sparsecv/glm.hpp"
#include "sparsecv/l1_solver.hpp"

namespace sparsecv {

/// Largest smoothing sharpness accepted by fit_smooth; larger values are
/// clamped with a note on the result.
inline constexpr double kMaxEta = 1e4;

/// Minimizes (1/N) sum_{m != exclude} f_m + lambda R for L2 or SmoothedL1 R.
///
/// Damped Newton with Armijo backtracking. Converged when the gradient
/// 2-norm is at most config.kkt_tol. When the Newton system is singular the
/// step falls back to steepest descent and a note is recorded.
FitResult fit_smooth(const Dataset& data, const Regularizer& reg, const SolverConfig& config = {},
                     std::optional<Index> exclude = std::nullopt);

}  // namespace sparsecv
