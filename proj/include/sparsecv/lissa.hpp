#pragma once

#include "sparsecv/exact_cv.hpp"
#include "sparsecv/glm.hpp"

#include <cstdint>
#include <optional>

namespace sparsecv {

struct LissaConfig {
  /// Series truncation depth K.
  int depth_k = 100;
  /// Number of independent recursions M that are averaged.
  int repeats_m = 10;
  /// Normalization s; estimated from the data when empty.
  std::optional<double> scale;
  std::uint64_t seed = 0;
  /// Use (1/N) lambda R'' in each sampled term instead of lambda R''.
  bool literal_regularizer_term = false;
};

/// Normalization for the series: 1.1 times the larger of a power-iteration
/// estimate of |H|_op and the largest single-sample curvature
/// max_n d2_n |x_n|^2 + lambda max R''.
double lissa_default_scale(const Dataset& data, const Regularizer& reg, const Vector& theta);

/// Stochastic estimate of H(theta)^{-1} v.
///
/// Each repeat runs Hbar_k = v + (I - A_k / s) Hbar_{k-1} from Hbar_0 = v with
/// A_k = d2_{n_k} x_{n_k} x_{n_k}^T + lambda diag(R''), n_k uniform. The
/// repeats are averaged and divided by s. Throws divergence-detected if an
/// iterate grows past 1e8 |v|.
Vector lissa_inverse_hvp(const Dataset& data, const Regularizer& reg, const Vector& theta,
                         const Vector& v, const LissaConfig& cfg);

/// IJ estimates with the Hessian solve replaced by lissa_inverse_hvp. Each
/// point n uses its own random stream derived from cfg.seed.
LooSet ij_full_lissa(const Dataset& data, const Regularizer& reg, const FitResult& fit,
                     const LissaConfig& cfg);

}  // namespace sparsecv
