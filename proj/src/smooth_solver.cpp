#include "sparsecv/smooth_solver.hpp"

#include "sparsecv/error.hpp"
#include "sparsecv/hessian_factor.hpp"

#include <cmath>

namespace sparsecv {

namespace {

constexpr double kArmijo = 1e-4;
constexpr double kMinStep = 1e-16;
constexpr double kRoundoff = 1e-14;

}  // namespace

FitResult fit_smooth(const Dataset& data, const Regularizer& reg_in, const SolverConfig& config,
                     std::optional<Index> exclude) {
  if (!reg_in.twice_differentiable()) {
    throw Error(ErrorKind::kNonDifferentiableRegularizer,
                "fit_smooth needs an L2 or smoothed-l1 regularizer");
  }
  if (!(reg_in.lambda >= 0.0)) throw Error(ErrorKind::kInvalidArgument, "lambda must be >= 0");
  if (config.max_iters < 1) throw Error(ErrorKind::kInvalidArgument, "max_iters must be >= 1");
  check_index(data, exclude);
  if (config.warm_start && config.warm_start->size() != data.d()) {
    throw Error(ErrorKind::kInvalidArgument, "warm start length does not match D");
  }

  FitResult result;
  Regularizer reg = reg_in;
  if (reg.kind == RegKind::kSmoothedL1 && reg.eta > kMaxEta) {
    result.notes.push_back("eta clamped to " + std::to_string(kMaxEta));
    reg.eta = kMaxEta;
  }

  Vector theta = config.warm_start ? *config.warm_start : Vector::Zero(data.d());
  double objective = objective_value(data, reg, theta, exclude);
  Vector grad = objective_gradient(data, reg, theta, exclude);
  double grad_norm = grad.norm();
  result.objective_trace.push_back(objective);
  bool converged = grad_norm <= config.kkt_tol;
  bool noted_singular = false;
  int iter = 0;

  while (!converged && iter < config.max_iters) {
    ++iter;
    Vector step;
    try {
      step = -HessianFactor::for_objective(data, reg, theta, exclude).solve(grad);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kSingularHessian) throw;
      if (!noted_singular) {
        result.notes.push_back(std::string(to_string(ErrorKind::kSingularHessian)) +
                               ": gradient step used (" + e.what() + ")");
        noted_singular = true;
      }
      step = -grad;
    }
    double slope = grad.dot(step);
    if (!(slope < 0.0) || !step.allFinite()) {
      step = -grad;
      slope = -grad_norm * grad_norm;
    }

    double t = 1.0;
    bool accepted = false;
    Vector candidate;
    double cand_obj = 0.0;
    Vector cand_grad;
    while (t >= kMinStep) {
      candidate = theta + t * step;
      cand_grad.resize(0);
      cand_obj = objective_value(data, reg, candidate, exclude);
      if (cand_obj <= objective + kArmijo * t * slope) {
        accepted = true;
      } else if (t == 1.0 && cand_obj <= objective + kRoundoff * (1.0 + std::abs(objective))) {
        // Near the optimum the objective no longer resolves the decrease;
        // judge the full step by the gradient instead.
        cand_grad = objective_gradient(data, reg, candidate, exclude);
        accepted = cand_grad.norm() < grad_norm;
      }
      if (accepted) break;
      t *= 0.5;
    }
    if (!accepted) break;

    theta = std::move(candidate);
    objective = cand_obj;
    grad = cand_grad.size() == theta.size() ? std::move(cand_grad)
                                            : objective_gradient(data, reg, theta, exclude);
    grad_norm = grad.norm();
    result.objective_trace.push_back(objective);
    converged = grad_norm <= config.kkt_tol;
  }

  result.theta = theta;
  result.support = support_of(theta);
  result.objective_value = objective;
  result.iterations = iter;
  result.kkt_violation = grad_norm;
  result.converged = converged;
  if (!converged) {
    result.notes.push_back(std::string(to_string(ErrorKind::kNoConvergence)) + ": stopped after " +
                           std::to_string(iter) + " iterations, gradient norm " +
                           std::to_string(grad_norm));
  }
  return result;
}

}  // namespace sparsecv
