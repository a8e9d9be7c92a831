#pragma once

#include "sparsecv/exact_cv.hpp"
#include "sparsecv/glm.hpp"

namespace sparsecv {

/// Infinitesimal-jackknife estimates theta + (1/N) H^{-1} grad f_n for every n,
/// from one factorization of the full Hessian. Tagged smoothed_ij when the
/// regularizer is smoothed-l1.
LooSet ij_full(const Dataset& data, const Regularizer& reg, const FitResult& fit);

/// Newton-step estimates theta + (1/N) (H - d2_n x_n x_n^T / N)^{-1} grad f_n,
/// each downdate applied by Sherman-Morrison. Throws singular-downdate when a
/// denominator falls to 1e-12 or below.
LooSet ns_full(const Dataset& data, const Regularizer& reg, const FitResult& fit);

/// IJ restricted to the support of an L1 fit, using the unregularized
/// support Hessian. Entries off the support are exactly zero.
LooSet ij_restricted(const Dataset& data, double lambda, const FitResult& fit);

/// NS restricted to the support. Requires |S| < N.
LooSet ns_restricted(const Dataset& data, double lambda, const FitResult& fit);

/// (1/N) sum_n f(x_n^T theta^{\n}, y_n). Throws incomplete-loo-set.
double aloo_estimate(const Dataset& data, const LooSet& loos);

/// |aloo - loo| / loo. Throws division-by-zero when loo = 0.
double percent_error(double aloo, double loo);

}  // namespace sparsecv
