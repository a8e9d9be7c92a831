#include "sparsecv/approx_cv.hpp"

#include "sparsecv/error.hpp"
#include "sparsecv/hessian_factor.hpp"
#include "sparsecv/parallel.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>

namespace sparsecv {

namespace {

constexpr double kDowndateGuard = 1e-12;
constexpr Index kChunk = 256;

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void derivatives_at(const Dataset& data, const Vector& theta, Vector& d1, Vector& d2) {
  loss_derivatives(data.family(), data.x().times(theta), data.y(), d1, d2);
}

[[noreturn]] void throw_downdate(Index n, double denom) {
  std::ostringstream msg;
  msg << "Sherman-Morrison denominator " << denom << " at n = " << n;
  throw Error(ErrorKind::kSingularDowndate, msg.str());
}

// Fills out.thetas(rows, n) = base + step_n, where step_n comes from solving
// against x_n restricted to `cols` (all columns when empty).
template <class Solve>
void fill_updates(const Dataset& data, const Vector& base, const IndexSet& cols, bool newton,
                  const Vector& d1, const Vector& d2, Solve&& solve, LooSet& out) {
  const Index n_rows = data.n();
  const double big_n = static_cast<double>(n_rows);
  const bool all_cols = cols.empty();
  const Index dim = all_cols ? data.d() : static_cast<Index>(cols.size());
  const Index chunks = (n_rows + kChunk - 1) / kChunk;
  std::vector<double> bad_denom(static_cast<std::size_t>(n_rows), 1.0);

  parallel_for(static_cast<std::size_t>(chunks), [&](std::size_t c) {
    const Index first = static_cast<Index>(c) * kChunk;
    const Index count = std::min(kChunk, n_rows - first);
    std::vector<Index> rows(static_cast<std::size_t>(count));
    std::iota(rows.begin(), rows.end(), first);
    // dim x count block of x_n (restricted) columns.
    Matrix xt(dim, count);
    const Design block = data.x().select_rows(rows);
    if (all_cols) {
      xt = block.to_dense().transpose();
    } else {
      xt = block.columns(cols).transpose();
    }
    const Matrix z = solve(xt);
    for (Index j = 0; j < count; ++j) {
      const Index n = first + j;
      double scale = d1[n] / big_n;
      if (newton) {
        const double denom = 1.0 - d2[n] / big_n * xt.col(j).dot(z.col(j));
        if (!(denom > kDowndateGuard)) {
          bad_denom[n] = denom;
          continue;
        }
        scale /= denom;
      }
      if (all_cols) {
        out.thetas.col(n) = base + scale * z.col(j);
      } else {
        for (std::size_t k = 0; k < cols.size(); ++k) {
          out.thetas(cols[k], n) = base[cols[k]] + scale * z(static_cast<Index>(k), j);
        }
      }
    }
  });
  for (Index n = 0; n < n_rows; ++n) {
    if (!(bad_denom[n] > kDowndateGuard)) throw_downdate(n, bad_denom[n]);
  }
  out.available.assign(static_cast<std::size_t>(n_rows), 1);
}

LooSet full_method(const Dataset& data, const Regularizer& reg, const FitResult& fit,
                   bool newton) {
  const auto start = std::chrono::steady_clock::now();
  if (!reg.twice_differentiable()) {
    throw Error(ErrorKind::kNonDifferentiableRegularizer,
                "full-dimensional IJ/NS need a twice-differentiable regularizer");
  }
  const bool smoothed = reg.kind == RegKind::kSmoothedL1;
  LooSet out;
  out.method = newton ? (smoothed ? LooMethod::kSmoothedNs : LooMethod::kNsFull)
                      : (smoothed ? LooMethod::kSmoothedIj : LooMethod::kIjFull);
  const HessianFactor factor = HessianFactor::for_objective(data, reg, fit.theta);
  Vector d1, d2;
  derivatives_at(data, fit.theta, d1, d2);
  out.thetas = Matrix::Zero(data.d(), data.n());
  fill_updates(data, fit.theta, {}, newton, d1, d2,
               [&](const Matrix& b) { return factor.solve(b); }, out);
  out.wall_time = seconds_since(start);
  return out;
}

LooSet restricted_method(const Dataset& data, const FitResult& fit, bool newton) {
  const auto start = std::chrono::steady_clock::now();
  const IndexSet& s = fit.support;
  LooSet out;
  out.method = newton ? LooMethod::kNsRestricted : LooMethod::kIjRestricted;
  out.thetas = Matrix::Zero(data.d(), data.n());
  if (newton && static_cast<Index>(s.size()) >= data.n()) {
    throw Error(ErrorKind::kSupportTooLarge,
                "restricted NS needs |S| < N (|S| = " + std::to_string(s.size()) + ")");
  }
  if (s.empty()) {
    out.available.assign(static_cast<std::size_t>(data.n()), 1);
    out.wall_time = seconds_since(start);
    return out;
  }
  std::optional<HessianFactor> factor;
  try {
    factor = HessianFactor::dense(restricted_hessian(data, fit.theta, s));
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::kSingularHessian) throw;
    throw Error(ErrorKind::kSingularRestrictedHessian, e.what());
  }
  Vector d1, d2;
  derivatives_at(data, fit.theta, d1, d2);
  fill_updates(data, fit.theta, s, newton, d1, d2,
               [&](const Matrix& b) { return factor->solve(b); }, out);
  out.wall_time = seconds_since(start);
  return out;
}

}  // namespace

LooSet ij_full(const Dataset& data, const Regularizer& reg, const FitResult& fit) {
  return full_method(data, reg, fit, false);
}

LooSet ns_full(const Dataset& data, const Regularizer& reg, const FitResult& fit) {
  return full_method(data, reg, fit, true);
}

LooSet ij_restricted(const Dataset& data, double /*lambda*/, const FitResult& fit) {
  return restricted_method(data, fit, false);
}

LooSet ns_restricted(const Dataset& data, double /*lambda*/, const FitResult& fit) {
  return restricted_method(data, fit, true);
}

double aloo_estimate(const Dataset& data, const LooSet& loos) {
  if (loos.n() != data.n() || loos.d() != data.d() || !loos.complete()) {
    throw Error(ErrorKind::kIncompleteLooSet,
                "LOO set does not cover every point of the dataset");
  }
  std::vector<Index> folds(static_cast<std::size_t>(data.n()));
  std::iota(folds.begin(), folds.end(), Index{0});
  const Vector losses = left_out_losses(data, loos.thetas, folds);
  double sum = 0.0;
  for (Index i = 0; i < losses.size(); ++i) sum += losses[i];
  return sum / static_cast<double>(data.n());
}

double percent_error(double aloo, double loo) {
  if (loo == 0.0) throw Error(ErrorKind::kDivisionByZero, "percent error undefined for loo = 0");
  return std::abs(aloo - loo) / loo;
}

}  // namespace sparsecv
