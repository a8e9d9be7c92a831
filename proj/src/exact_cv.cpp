#include "sparsecv/exact_cv.hpp"

#include "sparsecv/error.hpp"
#include "sparsecv/hessian_factor.hpp"
#include "sparsecv/parallel.hpp"
#include "sparsecv/random.hpp"
#include "sparsecv/smooth_solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

namespace sparsecv {

namespace {

constexpr int kMaxChordIters = 200;
constexpr int kChordStallLimit = 3;
constexpr double kDowndateGuard = 1e-12;

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// Shared state for refitting many folds of one problem.
struct FoldContext {
  const Dataset& data;
  const Regularizer& reg;
  const SolverConfig& config;
  const FitResult& full_fit;
  // Smooth regularizers only.
  std::optional<HessianFactor> factor;
  Vector d2;

  FoldContext(const Dataset& data_in, const Regularizer& reg_in, const SolverConfig& config_in,
              const FitResult& fit_in)
      : data(data_in), reg(reg_in), config(config_in), full_fit(fit_in) {
    if (!reg.twice_differentiable()) return;
    try {
      factor = HessianFactor::for_objective(data, reg, full_fit.theta);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kSingularHessian) throw;
    }
    Vector d1;
    loss_derivatives(data.family(), data.x().times(full_fit.theta), data.y(), d1, d2);
  }

  FitResult newton_fold(Index n) const {
    return loo_refit(data, reg, n, full_fit.theta, config);
  }

  // Chord iterations theta <- theta - H_n^{-1} grad F_n(theta), with H_n the
  // leave-one-out Hessian at the full-data fit applied by Sherman-Morrison.
  FitResult chord_fold(Index n) const {
    const double big_n = static_cast<double>(data.n());
    const Vector xn = data.x().row(n);
    const Vector zn = factor->solve(xn);
    const double a = d2[n] / big_n;
    const double denom = 1.0 - a * xn.dot(zn);
    if (!(denom > kDowndateGuard)) return newton_fold(n);

    Vector theta = full_fit.theta;
    double best = std::numeric_limits<double>::infinity();
    int stalls = 0;
    for (int it = 0; it < kMaxChordIters; ++it) {
      const Vector g = objective_gradient(data, reg, theta, n);
      const double gn = g.norm();
      if (!std::isfinite(gn)) break;
      if (gn <= config.kkt_tol) {
        FitResult r;
        r.theta = std::move(theta);
        r.support = support_of(r.theta);
        r.objective_value = objective_value(data, reg, r.theta, n);
        r.iterations = it;
        r.converged = true;
        r.kkt_violation = gn;
        return r;
      }
      if (gn < best) {
        best = gn;
        stalls = 0;
      } else if (++stalls >= kChordStallLimit) {
        break;
      }
      const Vector u = factor->solve(g);
      theta -= u + zn * (a * xn.dot(u) / denom);
    }
    return newton_fold(n);
  }

  FitResult fold(Index n) const {
    if (!reg.twice_differentiable()) return loo_refit(data, reg, n, full_fit.theta, config);
    if (factor) return chord_fold(n);
    return newton_fold(n);
  }
};

struct FoldRun {
  Matrix thetas;
  std::vector<char> available;
  std::vector<char> converged;
  std::vector<std::string> failures;
};

FoldRun run_folds(const FoldContext& ctx, const std::vector<Index>& folds) {
  const Index n_total = ctx.data.n();
  FoldRun run;
  run.thetas = Matrix::Zero(ctx.data.d(), n_total);
  run.available.assign(static_cast<std::size_t>(n_total), 0);
  run.converged.assign(static_cast<std::size_t>(n_total), 0);
  std::vector<std::string> errors(static_cast<std::size_t>(n_total));
  parallel_for(folds.size(), [&](std::size_t i) {
    const Index n = folds[i];
    try {
      FitResult r = ctx.fold(n);
      run.thetas.col(n) = r.theta;
      run.available[n] = 1;
      run.converged[n] = r.converged ? 1 : 0;
      if (!r.converged) errors[n] = "fold " + std::to_string(n) + ": did not converge";
    } catch (const Error& e) {
      errors[n] = "fold " + std::to_string(n) + ": " + std::string(to_string(e.kind())) + ": " +
                  e.what();
    }
  });
  for (Index n : folds) {
    if (!errors[n].empty()) run.failures.push_back(errors[n]);
  }
  return run;
}

}  // namespace

std::string to_string(LooMethod method) {
  switch (method) {
    case LooMethod::kExact: return "exact";
    case LooMethod::kNsFull: return "ns_full";
    case LooMethod::kIjFull: return "ij_full";
    case LooMethod::kNsRestricted: return "ns_restricted";
    case LooMethod::kIjRestricted: return "ij_restricted";
    case LooMethod::kIjLissa: return "ij_lissa";
    case LooMethod::kSmoothedNs: return "smoothed_ns";
    case LooMethod::kSmoothedIj: return "smoothed_ij";
  }
  return "unknown";
}

LooMethod loo_method_from_string(const std::string& name) {
  for (LooMethod m : {LooMethod::kExact, LooMethod::kNsFull, LooMethod::kIjFull,
                      LooMethod::kNsRestricted, LooMethod::kIjRestricted, LooMethod::kIjLissa,
                      LooMethod::kSmoothedNs, LooMethod::kSmoothedIj}) {
    if (to_string(m) == name) return m;
  }
  throw Error(ErrorKind::kInvalidArgument, "unknown method: " + name);
}

Vector left_out_losses(const Dataset& data, const Matrix& thetas,
                       const std::vector<Index>& folds) {
  const Vector z = data.x().visit([&](const auto& x) -> Vector {
    using M = std::decay_t<decltype(x)>;
    Vector out = Vector::Zero(static_cast<Index>(folds.size()));
    if constexpr (std::is_same_v<M, Matrix>) {
      for (std::size_t i = 0; i < folds.size(); ++i) {
        out[i] = x.row(folds[i]).dot(thetas.col(folds[i]));
      }
    } else {
      std::vector<Index> pos(static_cast<std::size_t>(x.rows()), -1);
      for (std::size_t i = 0; i < folds.size(); ++i) pos[folds[i]] = static_cast<Index>(i);
      for (Index d = 0; d < x.cols(); ++d) {
        for (typename M::InnerIterator it(x, d); it; ++it) {
          const Index p = pos[it.row()];
          if (p >= 0) out[p] += it.value() * thetas(d, it.row());
        }
      }
    }
    return out;
  });
  Vector losses(static_cast<Index>(folds.size()));
  for (std::size_t i = 0; i < folds.size(); ++i) {
    losses[i] = loss_value(data.family(), z[i], data.y()[folds[i]]);
  }
  return losses;
}

bool LooSet::complete() const {
  return std::all_of(available.begin(), available.end(), [](char c) { return c != 0; }) &&
         static_cast<Index>(available.size()) == thetas.cols();
}

FitResult fit_model(const Dataset& data, const Regularizer& reg, const SolverConfig& config,
                    std::optional<Index> exclude) {
  if (reg.kind == RegKind::kL1) return fit_l1(data, reg.lambda, config, exclude);
  return fit_smooth(data, reg, config, exclude);
}

FitResult loo_refit(const Dataset& data, const Regularizer& reg, Index n, const Vector& warm,
                    const SolverConfig& config) {
  check_index(data, n);
  SolverConfig cfg = config;
  cfg.warm_start = warm;
  return fit_model(data, reg, cfg, n);
}

ExactLoo exact_loocv(const Dataset& data, const Regularizer& reg, const SolverConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  SolverConfig full_config = config;
  full_config.warm_start.reset();
  const FitResult fit = fit_model(data, reg, full_config);
  ExactLoo out = exact_loocv(data, reg, config, fit);
  out.set.wall_time = seconds_since(start);
  return out;
}

ExactLoo exact_loocv(const Dataset& data, const Regularizer& reg, const SolverConfig& config,
                     const FitResult& full_fit) {
  const auto start = std::chrono::steady_clock::now();
  std::vector<Index> folds(static_cast<std::size_t>(data.n()));
  std::iota(folds.begin(), folds.end(), Index{0});
  const FoldContext ctx(data, reg, config, full_fit);
  FoldRun run = run_folds(ctx, folds);

  ExactLoo out;
  out.full_fit = full_fit;
  out.set.method = LooMethod::kExact;
  out.set.thetas = std::move(run.thetas);
  out.set.available = std::move(run.available);
  out.set.failures = std::move(run.failures);
  out.fold_converged = std::move(run.converged);
  const bool all_ok = std::all_of(out.fold_converged.begin(), out.fold_converged.end(),
                                  [](char c) { return c != 0; });
  if (all_ok) {
    const Vector losses = left_out_losses(data, out.set.thetas, folds);
    double sum = 0.0;
    for (Index i = 0; i < losses.size(); ++i) sum += losses[i];
    out.loo = sum / static_cast<double>(data.n());
  }
  out.set.wall_time = seconds_since(start);
  return out;
}

std::vector<Index> sample_without_replacement(Index n, Index k, std::uint64_t seed) {
  if (k < 0 || k > n) throw Error(ErrorKind::kInvalidArgument, "sample size must be in [0, N]");
  std::vector<Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Index{0});
  for (Index i = 0; i < k; ++i) {
    const double u = counter_uniform(seed, Stream::kSubsample, static_cast<std::uint64_t>(i), 0);
    const Index j = i + std::min(static_cast<Index>(u * static_cast<double>(n - i)), n - i - 1);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(static_cast<std::size_t>(k));
  std::sort(idx.begin(), idx.end());
  return idx;
}

SubsampledCv subsampled_cv(const Dataset& data, const Regularizer& reg, Index k,
                           std::uint64_t seed, const SolverConfig& config) {
  SolverConfig full_config = config;
  full_config.warm_start.reset();
  const auto start = std::chrono::steady_clock::now();
  const FitResult fit = fit_model(data, reg, full_config);
  SubsampledCv out = subsampled_cv(data, reg, k, seed, config, fit);
  out.wall_time = seconds_since(start);
  return out;
}

SubsampledCv subsampled_cv(const Dataset& data, const Regularizer& reg, Index k,
                           std::uint64_t seed, const SolverConfig& config,
                           const FitResult& full_fit) {
  if (k < 1 || k > data.n()) throw Error(ErrorKind::kInvalidArgument, "k must be in [1, N]");
  const auto start = std::chrono::steady_clock::now();
  SubsampledCv out;
  out.folds = sample_without_replacement(data.n(), k, seed);
  const FoldContext ctx(data, reg, config, full_fit);
  const FoldRun run = run_folds(ctx, out.folds);
  for (Index n : out.folds) {
    if (!run.converged[n]) {
      throw Error(ErrorKind::kNoConvergence,
                  run.failures.empty() ? "fold did not converge" : run.failures.front());
    }
  }
  const Vector losses = left_out_losses(data, run.thetas, out.folds);
  double sum = 0.0;
  for (Index i = 0; i < losses.size(); ++i) sum += losses[i];
  out.estimate = sum / static_cast<double>(k);
  if (k > 1) {
    double ss = 0.0;
    for (Index i = 0; i < losses.size(); ++i) ss += (losses[i] - out.estimate) * (losses[i] - out.estimate);
    out.std_error = std::sqrt(ss / static_cast<double>(k - 1)) / std::sqrt(static_cast<double>(k));
  } else {
    out.std_error = std::numeric_limits<double>::quiet_NaN();
  }
  out.wall_time = seconds_since(start);
  return out;
}

}  // namespace sparsecv
