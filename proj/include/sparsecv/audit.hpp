#pragma once

#include "sparsecv/exact_cv.hpp"
#include "sparsecv/glm.hpp"
#include "sparsecv/l1_solver.hpp"

#include <optional>
#include <string>
#include <vector>

namespace sparsecv {

// Hessian-type quantities in this module are unnormalized sums over rows,
// e.g. X_S^T diag(w) X_S, with w = d2(x_n^T theta) (w = 1 for linear).

struct Condition1 {
  bool holds = false;
  IndexSet full_support;
  /// Support of the exact leave-one-out fit, per n.
  std::vector<IndexSet> supports_by_n;
  /// Supports of the restricted IJ / NS estimates, per n.
  std::vector<IndexSet> ij_supports_by_n;
  std::vector<IndexSet> ns_supports_by_n;
  ExactLoo exact;
};

/// Runs exact LOO and both restricted approximations; holds iff every
/// support equals the full-data support.
Condition1 check_condition1(const Dataset& data, double lambda, const FitResult& fit,
                            const SolverConfig& config = {});

/// max over d in S^c of |(H_{S^c S} H_SS^{-1})_d|_1 at theta.
double incoherence_norm(const Dataset& data, const Vector& theta, const IndexSet& s);

struct Jnd {
  Vector coefficients;
  double l1_norm = 0.0;
};

/// Leave-n-out regression of column d on the columns S:
/// (X_{\n,S}^T W X_{\n,S})^{-1} X_{\n,S}^T W x_{\n,d}.
Jnd jnd_loo(const Dataset& data, const Vector& theta, const IndexSet& s, Index n, Index d);

/// max over n and d in S^c of |J_nd|_1, via rank-one updates of the full fit.
double max_jnd_norm(const Dataset& data, const Vector& theta, const IndexSet& s);

struct MinEigLoo {
  /// min_n lambda_min(G - w_n x_nS x_nS^T) with G = X_S^T W X_S.
  double value = 0.0;
  /// lambda_min(G) - max_n w_n |x_nS|^2.
  double lower_bound = 0.0;
};

MinEigLoo min_eig_loo(const Dataset& data, const Vector& theta, const IndexSet& s);

struct BoundedGradient {
  /// max_n |grad F^{\n}(theta)|_inf with the 1/N data term.
  double max_inf_norm = 0.0;
  bool ok = false;
};

/// Compares the statistic above against gamma * lambda / 4.
BoundedGradient bounded_gradient_stat(const Dataset& data, const Vector& theta, double gamma,
                                      double lambda);

/// 0 for linear; (1/4) max_n |x_n|_inf * max_n |x_nS|_2^2 for logistic.
double lssc_constant(const Dataset& data, const IndexSet& s, Family family);

/// lambda < L^2 gamma / (4 (gamma + 4)^2 deff K); always true when K = 0.
bool lambda_small_ok(double lssc_k, double l_min, double gamma, double deff, double lambda);

/// M_J for linear regression. Infinite when its denominator is not positive.
double mj_linear(double n, double d, double deff, double c_x, double big_c);

/// M_J for logistic regression, with denominators built from l_min.
double mj_logistic(double n, double d, double deff, double c_x, double l_min, double big_c);

struct LambdaThreshold {
  double threshold = 0.0;
  double mj = 0.0;
};

/// Smallest lambda allowed by the support-stability theorems, with big_c in
/// place of every unspecified constant. Throws alpha-exceeded when
/// mj >= alpha. c_eps is ignored for logistic, l_min for linear.
LambdaThreshold lambda_threshold(Family family, double n, double d, double deff, double alpha,
                                 double c_x, double c_eps, double l_min, double big_c = 1.0);

/// min_{s in S} |theta*_s| - sqrt(deff) (gamma + 4) lambda / l_min. +inf for empty S.
double beta_min_margin(const Vector& theta_star, const IndexSet& s, double gamma, double l_min,
                       double deff, double lambda);

struct AuditInput {
  Dataset data;
  /// Ground truth, or the full-data fit when none is known.
  Vector theta_star;
  IndexSet s;
  double lambda = 0.0;
  double alpha = 0.5;
  double c_x = 1.0;
  double c_eps = 1.0;
  double big_c = 1.0;
  bool surrogate_truth = false;
  /// Also run exact LOO for the Condition 1 check.
  bool check_support_stability = true;
};

/// Every audit scalar; optional fields are unavailable, with a reason in notes.
struct AuditReport {
  std::optional<bool> condition1_holds;
  std::vector<std::size_t> support_sizes_by_n;
  std::optional<double> incoherence_norm;
  std::optional<double> max_jnd_norm;
  std::optional<double> gamma;
  std::optional<double> min_eig_loo;
  std::optional<double> min_eig_lower_bound;
  std::optional<double> l_min_over_n;
  std::optional<double> max_grad_inf_loo;
  std::optional<bool> bounded_gradient_ok;
  std::optional<double> beta_min_margin;
  double lssc_k = 0.0;
  std::optional<bool> lambda_small_ok;
  std::optional<double> lambda_threshold;
  std::optional<double> mj;
  bool surrogate_truth = false;
  std::vector<std::string> notes;
};

AuditReport run_audit(const AuditInput& input, const SolverConfig& config = {});

}  // namespace sparsecv
