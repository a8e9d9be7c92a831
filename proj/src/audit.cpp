#include "sparsecv/audit.hpp"

#include "sparsecv/approx_cv.hpp"
#include "sparsecv/error.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace sparsecv {

namespace {

constexpr double kDowndateGuard = 1e-12;
constexpr double kInf = std::numeric_limits<double>::infinity();

Vector weights_at(const Dataset& data, const Vector& theta) {
  Vector d1, d2;
  loss_derivatives(data.family(), data.x().times(theta), data.y(), d1, d2);
  return d2;
}

void check_support(const Dataset& data, const IndexSet& s) {
  for (Index j : s) {
    if (j < 0 || j >= data.d()) {
      throw Error(ErrorKind::kIndexOutOfRange, "support index out of range");
    }
  }
}

// Pieces shared by the incoherence and J_nd computations.
struct Blocks {
  Matrix xs;            // N x |S|
  Vector w;             // N
  Matrix g;             // X_S^T W X_S
  Matrix b;             // D x |S|, X^T W X_S
  Eigen::LLT<Matrix> llt;

  Blocks(const Dataset& data, const Vector& theta, const IndexSet& s) {
    check_support(data, s);
    xs = data.x().columns(s);
    w = weights_at(data, theta);
    const Matrix wxs = w.asDiagonal() * xs;
    g = xs.transpose() * wxs;
    b.resize(data.d(), static_cast<Index>(s.size()));
    for (Index k = 0; k < b.cols(); ++k) b.col(k) = data.x().transpose_times(wxs.col(k));
    llt.compute(g);
    if (llt.info() != Eigen::Success ||
        (g.rows() > 0 && llt.matrixLLT().diagonal().cwiseAbs2().minCoeff() <=
                             1e-14 * llt.matrixLLT().diagonal().cwiseAbs2().maxCoeff())) {
      throw Error(ErrorKind::kSingularRestrictedHessian,
                  "restricted Hessian X_S^T W X_S is numerically singular");
    }
  }
};

std::vector<char> membership(Index d, const IndexSet& s) {
  std::vector<char> in(static_cast<std::size_t>(d), 0);
  for (Index j : s) in[j] = 1;
  return in;
}

std::string fmt(double x) {
  std::ostringstream o;
  o.precision(17);
  o << x;
  return o.str();
}

}  // namespace

Condition1 check_condition1(const Dataset& data, double lambda, const FitResult& fit,
                            const SolverConfig& config) {
  Condition1 out;
  out.full_support = fit.support;
  out.exact = exact_loocv(data, Regularizer::l1(lambda), config, fit);
  const LooSet ij = ij_restricted(data, lambda, fit);
  std::optional<LooSet> ns;
  try {
    ns = ns_restricted(data, lambda, fit);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::kSupportTooLarge && e.kind() != ErrorKind::kSingularDowndate) throw;
  }
  bool holds = ns.has_value() && out.exact.set.complete();
  for (Index n = 0; n < data.n(); ++n) {
    out.supports_by_n.push_back(support_of(out.exact.set.theta(n)));
    out.ij_supports_by_n.push_back(support_of(ij.theta(n)));
    out.ns_supports_by_n.push_back(ns ? support_of(ns->theta(n)) : IndexSet{});
    holds = holds && out.supports_by_n.back() == fit.support &&
            out.ij_supports_by_n.back() == fit.support &&
            out.ns_supports_by_n.back() == fit.support;
  }
  out.holds = holds;
  return out;
}

double incoherence_norm(const Dataset& data, const Vector& theta, const IndexSet& s) {
  if (s.empty()) return 0.0;
  const Blocks blk(data, theta, s);
  const Matrix p = blk.llt.solve(blk.b.transpose());  // |S| x D
  const std::vector<char> in = membership(data.d(), s);
  double worst = 0.0;
  for (Index d = 0; d < data.d(); ++d) {
    if (!in[d]) worst = std::max(worst, p.col(d).lpNorm<1>());
  }
  return worst;
}

Jnd jnd_loo(const Dataset& data, const Vector& theta, const IndexSet& s, Index n, Index d) {
  check_index(data, n);
  if (d < 0 || d >= data.d()) throw Error(ErrorKind::kIndexOutOfRange, "column out of range");
  if (std::find(s.begin(), s.end(), d) != s.end()) {
    throw Error(ErrorKind::kInvalidArgument, "d must lie outside S");
  }
  Jnd out;
  if (s.empty()) return out;
  check_support(data, s);
  const Vector w = weights_at(data, theta);
  Matrix xs = data.x().columns(s);
  const IndexSet col_d{d};
  Vector xd = data.x().columns(col_d).col(0);
  xs.row(n).setZero();
  xd[n] = 0.0;
  const Matrix wxs = w.asDiagonal() * xs;
  const Matrix g = xs.transpose() * wxs;
  const Vector rhs = wxs.transpose() * xd;
  Eigen::ColPivHouseholderQR<Matrix> qr(g);
  if (qr.rank() < g.rows()) {
    throw Error(ErrorKind::kSingularRestrictedHessian,
                "leave-one-out restricted Hessian is rank deficient");
  }
  out.coefficients = qr.solve(rhs);
  out.l1_norm = out.coefficients.lpNorm<1>();
  return out;
}

double max_jnd_norm(const Dataset& data, const Vector& theta, const IndexSet& s) {
  if (s.empty()) return 0.0;
  const Blocks blk(data, theta, s);
  const Matrix j = blk.llt.solve(blk.b.transpose());  // column d is J_d
  const Matrix c = blk.llt.solve(blk.xs.transpose());  // column n is G^{-1} x_nS
  const std::vector<char> in = membership(data.d(), s);
  double worst = 0.0;
  for (Index n = 0; n < data.n(); ++n) {
    const double wn = blk.w[n];
    const double denom = 1.0 - wn * blk.xs.row(n).dot(c.col(n));
    if (!(denom > kDowndateGuard)) {
      throw Error(ErrorKind::kSingularRestrictedHessian,
                  "removing row " + std::to_string(n) + " makes the restricted Hessian singular");
    }
    const Vector t = j.transpose() * blk.xs.row(n).transpose() - data.x().row(n);
    for (Index d = 0; d < data.d(); ++d) {
      if (in[d]) continue;
      const double coef = wn * t[d] / denom;
      double norm = 0.0;
      for (Index k = 0; k < j.rows(); ++k) norm += std::abs(j(k, d) + coef * c(k, n));
      worst = std::max(worst, norm);
    }
  }
  return worst;
}

MinEigLoo min_eig_loo(const Dataset& data, const Vector& theta, const IndexSet& s) {
  if (s.empty()) throw Error(ErrorKind::kInvalidArgument, "min_eig_loo needs a nonempty S");
  check_support(data, s);
  const Matrix xs = data.x().columns(s);
  const Vector w = weights_at(data, theta);
  const Matrix g = xs.transpose() * w.asDiagonal() * xs;
  Eigen::SelfAdjointEigenSolver<Matrix> full(g, Eigen::EigenvaluesOnly);
  double max_row = 0.0;
  double value = kInf;
  for (Index n = 0; n < data.n(); ++n) {
    const Vector x = xs.row(n).transpose();
    max_row = std::max(max_row, w[n] * x.squaredNorm());
    const Matrix gn = g - w[n] * x * x.transpose();
    Eigen::SelfAdjointEigenSolver<Matrix> es(gn, Eigen::EigenvaluesOnly);
    value = std::min(value, es.eigenvalues()[0]);
  }
  return {value, full.eigenvalues()[0] - max_row};
}

BoundedGradient bounded_gradient_stat(const Dataset& data, const Vector& theta, double gamma,
                                      double lambda) {
  Vector d1, d2;
  loss_derivatives(data.family(), data.x().times(theta), data.y(), d1, d2);
  const double big_n = static_cast<double>(data.n());
  const Vector g = data.x().transpose_times(d1) / big_n;
  double worst = 0.0;
  for (Index n = 0; n < data.n(); ++n) {
    const Vector gn = g - (d1[n] / big_n) * data.x().row(n);
    worst = std::max(worst, gn.lpNorm<Eigen::Infinity>());
  }
  return {worst, worst <= gamma * lambda / 4.0};
}

double lssc_constant(const Dataset& data, const IndexSet& s, Family family) {
  if (family == Family::kLinear || s.empty()) return 0.0;
  check_support(data, s);
  const double max_abs = data.x().visit([](const auto& x) -> double {
    using M = std::decay_t<decltype(x)>;
    if constexpr (std::is_same_v<M, Matrix>) {
      return x.size() > 0 ? x.cwiseAbs().maxCoeff() : 0.0;
    } else {
      double m = 0.0;
      for (Index k = 0; k < x.nonZeros(); ++k) m = std::max(m, std::abs(x.valuePtr()[k]));
      return m;
    }
  });
  const Matrix xs = data.x().columns(s);
  const double max_row = xs.rowwise().squaredNorm().maxCoeff();
  return 0.25 * max_abs * max_row;
}

bool lambda_small_ok(double lssc_k, double l_min, double gamma, double deff, double lambda) {
  if (lssc_k == 0.0 || deff == 0.0) return true;
  const double bound =
      l_min * l_min * gamma / (4.0 * (gamma + 4.0) * (gamma + 4.0) * deff * lssc_k);
  return lambda < bound;
}

namespace {

// Shared numerators of the two M_J expressions.
double mj_from_denominator(double n, double d, double deff, double c_x, double big_c,
                           double denom) {
  if (deff == 0.0) return 0.0;
  if (!(denom > 0.0)) return kInf;
  const double cx2 = c_x * c_x;
  const double cx4 = cx2 * cx2;
  const double t1 = big_c * deff *
                    (std::sqrt(50.0 * cx2) + std::sqrt(2.0 * cx2 * std::log(n * (d - deff)))) *
                    (std::sqrt(deff) + std::sqrt(50.0 * cx4) + std::sqrt(2.0 * cx4 * std::log(n))) /
                    denom;
  const double t2 = big_c * deff * (deff + deff * cx2 * (std::log(n) + 26.0)) *
                    (std::sqrt(n) + std::sqrt(50.0 * cx4) + std::sqrt(2.0 * cx4 * std::log(d - deff))) *
                    (std::sqrt(n * deff) + std::sqrt(50.0 * cx4)) / (denom * denom);
  return t1 + t2;
}

void check_mj_args(double n, double d, double deff, double c_x) {
  if (!(n >= 1.0) || !(d >= 1.0) || !(c_x > 0.0) || !(deff >= 0.0) || !(deff < d)) {
    throw Error(ErrorKind::kInvalidArgument, "M_J needs N >= 1, 0 <= deff < D, c_x > 0");
  }
}

}  // namespace

double mj_linear(double n, double d, double deff, double c_x, double big_c) {
  check_mj_args(n, d, deff, c_x);
  const double denom = n - 3.0 * c_x * c_x * std::sqrt(n) * (std::sqrt(deff) + 5.0);
  return mj_from_denominator(n, d, deff, c_x, big_c, denom);
}

double mj_logistic(double n, double d, double deff, double c_x, double l_min, double big_c) {
  check_mj_args(n, d, deff, c_x);
  const double denom = l_min - c_x * c_x * std::sqrt(n) * (std::sqrt(deff) + 5.0);
  return mj_from_denominator(n, d, deff, c_x, big_c, denom);
}

LambdaThreshold lambda_threshold(Family family, double n, double d, double deff, double alpha,
                                 double c_x, double c_eps, double l_min, double big_c) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw Error(ErrorKind::kInvalidArgument, "alpha must lie in (0, 1)");
  }
  LambdaThreshold out;
  double bracket = 0.0;
  const double cx2 = c_x * c_x;
  if (family == Family::kLinear) {
    out.mj = mj_linear(n, d, deff, c_x, big_c);
    const double ce2 = c_eps * c_eps;
    bracket = std::sqrt(cx2 * ce2 * std::log(d) / n + 25.0 * cx2 * ce2 / n) +
              4.0 * c_x * c_eps * (std::log(n * d) + 26.0) / n;
  } else {
    out.mj = mj_logistic(n, d, deff, c_x, l_min, big_c);
    bracket = std::sqrt(cx2 * (25.0 + std::log(d)) / n) +
              (std::sqrt(2.0 * cx2 * std::log(n * d)) + std::sqrt(50.0 * cx2)) / n;
  }
  if (out.mj >= alpha) {
    throw Error(ErrorKind::kAlphaExceeded, "M_J = " + fmt(out.mj) + " >= alpha = " + fmt(alpha));
  }
  out.threshold = big_c / (alpha - out.mj) * bracket;
  return out;
}

double beta_min_margin(const Vector& theta_star, const IndexSet& s, double gamma, double l_min,
                       double deff, double lambda) {
  if (s.empty()) return kInf;
  double smallest = kInf;
  for (Index j : s) {
    if (j < 0 || j >= theta_star.size()) {
      throw Error(ErrorKind::kIndexOutOfRange, "support index out of range");
    }
    smallest = std::min(smallest, std::abs(theta_star[j]));
  }
  return smallest - std::sqrt(deff) * (gamma + 4.0) * lambda / l_min;
}

AuditReport run_audit(const AuditInput& in, const SolverConfig& config) {
  AuditReport r;
  r.surrogate_truth = in.surrogate_truth;
  const Dataset& data = in.data;
  const double deff = static_cast<double>(in.s.size());
  auto note = [&](const std::string& what, const Error& e) {
    r.notes.push_back(what + ": " + std::string(to_string(e.kind())) + ": " + e.what());
  };
  if (in.surrogate_truth) r.notes.push_back("surrogate-truth: theta_star is the full-data fit");

  if (in.check_support_stability) {
    try {
      const FitResult fit = fit_l1(data, in.lambda, config);
      const Condition1 c1 = check_condition1(data, in.lambda, fit, config);
      r.condition1_holds = c1.holds;
      for (const IndexSet& s : c1.supports_by_n) r.support_sizes_by_n.push_back(s.size());
    } catch (const Error& e) {
      note("condition1", e);
    }
  } else {
    r.notes.push_back("condition1: not-computed");
  }

  try {
    r.incoherence_norm = incoherence_norm(data, in.theta_star, in.s);
  } catch (const Error& e) {
    note("incoherence_norm", e);
  }
  try {
    r.max_jnd_norm = max_jnd_norm(data, in.theta_star, in.s);
    r.gamma = 1.0 - *r.max_jnd_norm;
  } catch (const Error& e) {
    note("max_jnd_norm", e);
  }
  try {
    const MinEigLoo me = min_eig_loo(data, in.theta_star, in.s);
    r.min_eig_loo = me.value;
    r.min_eig_lower_bound = me.lower_bound;
    r.l_min_over_n = me.value / static_cast<double>(data.n());
  } catch (const Error& e) {
    note("min_eig_loo", e);
  }
  if (r.gamma) {
    const BoundedGradient bg = bounded_gradient_stat(data, in.theta_star, *r.gamma, in.lambda);
    r.max_grad_inf_loo = bg.max_inf_norm;
    r.bounded_gradient_ok = bg.ok;
  } else {
    r.max_grad_inf_loo = bounded_gradient_stat(data, in.theta_star, 0.0, in.lambda).max_inf_norm;
    r.notes.push_back("bounded_gradient_ok: unavailable without gamma");
  }
  r.lssc_k = lssc_constant(data, in.s, data.family());
  if (r.gamma && r.min_eig_loo) {
    r.beta_min_margin =
        beta_min_margin(in.theta_star, in.s, *r.gamma, *r.min_eig_loo, deff, in.lambda);
    r.lambda_small_ok = lambda_small_ok(r.lssc_k, *r.min_eig_loo, *r.gamma, deff, in.lambda);
  } else if (in.s.empty()) {
    r.beta_min_margin = kInf;
    r.lambda_small_ok = true;
  }
  try {
    const double l_min = r.min_eig_loo.value_or(0.0);
    const LambdaThreshold lt =
        lambda_threshold(data.family(), static_cast<double>(data.n()),
                         static_cast<double>(data.d()), deff, in.alpha, in.c_x, in.c_eps, l_min,
                         in.big_c);
    r.lambda_threshold = lt.threshold;
    r.mj = lt.mj;
  } catch (const Error& e) {
    note("lambda_threshold", e);
    if (e.kind() == ErrorKind::kAlphaExceeded) {
      r.mj = data.family() == Family::kLinear
                 ? mj_linear(static_cast<double>(data.n()), static_cast<double>(data.d()), deff,
                             in.c_x, in.big_c)
                 : mj_logistic(static_cast<double>(data.n()), static_cast<double>(data.d()), deff,
                               in.c_x, r.min_eig_loo.value_or(0.0), in.big_c);
    }
  }
  return r;
}

}  // namespace sparsecv
