#include "sparsecv/l1_solver.hpp"

#include "sparsecv/error.hpp"

#include <algorithm>
#include <cmath>

namespace sparsecv {

double soft_threshold(double z, double gamma) {
  if (z > gamma) return z - gamma;
  if (z < -gamma) return z + gamma;
  return 0.0;
}

IndexSet support_of(const Vector& theta) {
  IndexSet s;
  for (Index d = 0; d < theta.size(); ++d) {
    if (theta[d] != 0.0) s.push_back(d);
  }
  return s;
}

namespace {

// IRLS weights are floored here so saturated logistic points keep a finite
// working response.
constexpr double kWeightFloor = 1e-10;
// Relative slack when comparing objectives across an outer step.
constexpr double kObjectiveSlack = 1e-13;

inline double col_dot(const Matrix& x, Index j, const Vector& v) { return x.col(j).dot(v); }

inline double col_dot(const SparseMatrix& x, Index j, const Vector& v) {
  double s = 0.0;
  for (SparseMatrix::InnerIterator it(x, j); it; ++it) s += it.value() * v[it.row()];
  return s;
}

inline double col_weighted_sq(const Matrix& x, Index j, const Vector& w) {
  return x.col(j).cwiseAbs2().dot(w);
}

inline double col_weighted_sq(const SparseMatrix& x, Index j, const Vector& w) {
  double s = 0.0;
  for (SparseMatrix::InnerIterator it(x, j); it; ++it) s += it.value() * it.value() * w[it.row()];
  return s;
}

// v -= delta * (w .* x_j)
inline void col_weighted_axpy(const Matrix& x, Index j, double delta, const Vector& w,
                              Vector& v) {
  v.noalias() -= delta * x.col(j).cwiseProduct(w);
}

inline void col_weighted_axpy(const SparseMatrix& x, Index j, double delta, const Vector& w,
                              Vector& v) {
  for (SparseMatrix::InnerIterator it(x, j); it; ++it) {
    v[it.row()] -= delta * it.value() * w[it.row()];
  }
}

// z += delta * x_j
inline void col_axpy(const Matrix& x, Index j, double delta, Vector& z) {
  z.noalias() += delta * x.col(j);
}

inline void col_axpy(const SparseMatrix& x, Index j, double delta, Vector& z) {
  for (SparseMatrix::InnerIterator it(x, j); it; ++it) z[it.row()] += delta * it.value();
}

template <class MatrixT>
class L1Solver {
 public:
  L1Solver(const MatrixT& x, const Dataset& data, double lambda, const SolverConfig& config,
           std::optional<Index> exclude)
      : x_(x),
        data_(data),
        lambda_(lambda),
        config_(config),
        exclude_(exclude),
        n_(static_cast<double>(data.n())) {}

  FitResult run() {
    const Index d = data_.d();
    theta_ = config_.warm_start ? *config_.warm_start : Vector::Zero(d);
    z_ = data_.x().times(theta_);
    std::vector<char> in_active(d, 0);
    for (Index j : support_of(theta_)) {
      active_.push_back(j);
      in_active[j] = 1;
    }

    FitResult result;
    bool converged = false;
    double objective = objective_now();
    result.objective_trace.push_back(objective);
    while (iterations_ < config_.max_iters) {
      if (!active_.empty()) {
        if (!solve_active(objective, result)) break;
      }
      // Full KKT pass: add every coordinate whose gradient exceeds lambda.
      const Vector grad = full_gradient();
      std::vector<Index> violators;
      for (Index j = 0; j < d; ++j) {
        if (!in_active[j] && std::abs(grad[j]) > lambda_) violators.push_back(j);
      }
      if (violators.empty()) {
        converged = true;
        break;
      }
      for (Index j : violators) in_active[j] = 1;
      active_.insert(active_.end(), violators.begin(), violators.end());
      std::sort(active_.begin(), active_.end());
    }

    result.theta = theta_;
    result.support = support_of(theta_);
    result.objective_value = objective_now();
    result.iterations = iterations_;
    result.kkt_violation = kkt_from_gradient(full_gradient());
    result.converged = converged && result.kkt_violation <= config_.kkt_tol;
    if (!result.converged) {
      result.notes.push_back(std::string(to_string(ErrorKind::kNoConvergence)) +
                             ": stopped after " + std::to_string(iterations_) +
                             " iterations, kkt residual " +
                             std::to_string(result.kkt_violation));
    }
    return result;
  }

 private:
  double objective_now() const {
    return objective_from_margins(data_, Regularizer::l1(lambda_), theta_, z_, exclude_);
  }

  Vector full_gradient() const {
    Vector d1, d2;
    loss_derivatives(data_.family(), z_, data_.y(), d1, d2);
    if (exclude_) d1[*exclude_] = 0.0;
    return data_.x().transpose_times(d1) / n_;
  }

  double kkt_from_gradient(const Vector& grad) const {
    double worst = 0.0;
    for (Index j = 0; j < grad.size(); ++j) {
      const double r = theta_[j] != 0.0
                           ? std::abs(grad[j] + lambda_ * (theta_[j] > 0 ? 1.0 : -1.0))
                           : std::max(std::abs(grad[j]) - lambda_, 0.0);
      worst = std::max(worst, r);
    }
    return worst;
  }

  // Outer quadratic-approximation loop restricted to the active set. Returns
  // false when the iteration budget runs out.
  bool solve_active(double& objective, FitResult& result) {
    const Index n_rows = data_.n();
    Vector d1, d2, w(n_rows), wr(n_rows), a(static_cast<Index>(active_.size()));
    while (iterations_ < config_.max_iters) {
      ++iterations_;
      loss_derivatives(data_.family(), z_, data_.y(), d1, d2);
      for (Index m = 0; m < n_rows; ++m) {
        w[m] = std::max(d2[m], kWeightFloor);
        wr[m] = -d1[m];  // w * (-d1 / w)
      }
      if (exclude_) {
        w[*exclude_] = 0.0;
        wr[*exclude_] = 0.0;
      }
      for (std::size_t k = 0; k < active_.size(); ++k) {
        a[static_cast<Index>(k)] = col_weighted_sq(x_, active_[k], w) / n_;
      }

      const Vector theta_old = theta_;
      Vector theta_new = theta_;
      bool inner_done = false;
      for (int sweep = 0; sweep < config_.max_iters; ++sweep) {
        double max_change = 0.0;
        for (std::size_t k = 0; k < active_.size(); ++k) {
          const Index j = active_[k];
          const double ajj = a[static_cast<Index>(k)];
          if (ajj <= 0.0) continue;
          const double g = col_dot(x_, j, wr) / n_;
          const double updated = soft_threshold(ajj * theta_new[j] + g, lambda_) / ajj;
          const double delta = updated - theta_new[j];
          if (delta != 0.0) {
            col_weighted_axpy(x_, j, delta, w, wr);
            theta_new[j] = updated;
            max_change = std::max(max_change, std::abs(delta));
          }
        }
        if (max_change <= config_.tol) {
          inner_done = true;
          break;
        }
      }
      if (!inner_done) return false;

      // Damped step theta_old + t (theta_new - theta_old).
      Vector dz = Vector::Zero(n_rows);
      double step_size = 0.0;
      for (Index j : active_) {
        const double delta = theta_new[j] - theta_old[j];
        if (delta != 0.0) {
          col_axpy(x_, j, delta, dz);
          step_size = std::max(step_size, std::abs(delta));
        }
      }
      double t = 1.0;
      const Vector z_old = z_;
      for (;;) {
        theta_ = theta_old + t * (theta_new - theta_old);
        z_ = z_old + t * dz;
        const double candidate = objective_now();
        if (candidate <= objective + kObjectiveSlack * (1.0 + std::abs(objective)) ||
            t < 1e-12) {
          objective = candidate;
          break;
        }
        t *= 0.5;
      }
      result.objective_trace.push_back(objective);
      if (t * step_size <= config_.tol) return true;
    }
    return false;
  }

  const MatrixT& x_;
  const Dataset& data_;
  double lambda_;
  const SolverConfig& config_;
  std::optional<Index> exclude_;
  double n_;
  Vector theta_;
  Vector z_;
  std::vector<Index> active_;
  int iterations_ = 0;
};

FitResult fit_unscaled(const Dataset& data, double lambda, const SolverConfig& config,
                       std::optional<Index> exclude) {
  return data.x().visit([&](const auto& x) {
    using M = std::decay_t<decltype(x)>;
    return L1Solver<M>(x, data, lambda, config, exclude).run();
  });
}

}  // namespace

FitResult fit_l1(const Dataset& data, double lambda, const SolverConfig& config,
                 std::optional<Index> exclude) {
  if (!(lambda >= 0.0)) throw Error(ErrorKind::kInvalidArgument, "lambda must be >= 0");
  if (config.max_iters < 1) throw Error(ErrorKind::kInvalidArgument, "max_iters must be >= 1");
  check_index(data, exclude);
  if (config.warm_start && config.warm_start->size() != data.d()) {
    throw Error(ErrorKind::kInvalidArgument, "warm start length does not match D");
  }
  if (!config.standardize) return fit_unscaled(data, lambda, config, exclude);

  Vector scale = (data.x().column_sq_norms() / static_cast<double>(data.n())).cwiseSqrt();
  for (Index j = 0; j < scale.size(); ++j) {
    if (scale[j] == 0.0) scale[j] = 1.0;
  }
  const Vector inv = scale.cwiseInverse();
  Design scaled = data.x().is_sparse() ? Design(SparseMatrix(data.x().sparse() * inv.asDiagonal()))
                                       : Design(Matrix(data.x().dense() * inv.asDiagonal()));
  const Dataset scaled_data(std::move(scaled), data.y(), data.family());
  SolverConfig scaled_config = config;
  scaled_config.standardize = false;
  if (config.warm_start) scaled_config.warm_start = config.warm_start->cwiseProduct(scale);
  FitResult fit = fit_unscaled(scaled_data, lambda, scaled_config, exclude);
  fit.theta = fit.theta.cwiseProduct(inv);
  fit.support = support_of(fit.theta);
  fit.notes.push_back("standardized columns; kkt residual refers to the scaled problem");
  return fit;
}

double l1_kkt_violation(const Dataset& data, double lambda, const Vector& theta,
                        std::optional<Index> exclude) {
  const Vector grad = loss_gradient(data, theta, exclude);
  double worst = 0.0;
  for (Index j = 0; j < grad.size(); ++j) {
    const double r = theta[j] != 0.0
                         ? std::abs(grad[j] + lambda * (theta[j] > 0 ? 1.0 : -1.0))
                         : std::max(std::abs(grad[j]) - lambda, 0.0);
    worst = std::max(worst, r);
  }
  return worst;
}

}  // namespace sparsecv
