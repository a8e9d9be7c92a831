#pragma once

#include "sparsecv/glm.hpp"

#include <optional>

namespace sparsecv {

struct SolverConfig {
  /// Convergence threshold on the largest coordinate change per pass.
  double tol = 1e-10;
  /// Cap on outer iterations (IRLS steps, or Newton steps for smooth fits).
  int max_iters = 10000;
  /// KKT residual (L1) or gradient norm (smooth) accepted on return.
  double kkt_tol = 1e-8;
  std::optional<Vector> warm_start;
  /// Fit on columns scaled to unit root-mean-square; theta is returned in
  /// the original units. The penalty then weighs coordinate j by the RMS of
  /// column j. Off by default.
  bool standardize = false;
};

/// sign(z) * max(|z| - gamma, 0).
double soft_threshold(double z, double gamma);

/// Exact nonzero coordinates of theta, sorted.
IndexSet support_of(const Vector& theta);

/// Minimizes (1/N) sum_{m != exclude} f_m(theta) + lambda |theta|_1.
///
/// Coordinate descent over an active set, wrapped in an IRLS loop for the
/// logistic family (the linear family needs a single quadratic pass). After
/// the active set converges the full gradient is checked and any KKT
/// violators join the active set. Sweeps run in increasing coordinate order,
/// so results are bit-reproducible.
///
/// A fit that hits max_iters is returned with converged = false and a
/// "no-convergence" note.
FitResult fit_l1(const Dataset& data, double lambda, const SolverConfig& config = {},
                 std::optional<Index> exclude = std::nullopt);

/// Largest KKT residual of theta for the L1 problem:
/// |grad_d + lambda sign(theta_d)| on the support, max(|grad_d| - lambda, 0) off it.
double l1_kkt_violation(const Dataset& data, double lambda, const Vector& theta,
                        std::optional<Index> exclude = std::nullopt);

}  // namespace sparsecv
