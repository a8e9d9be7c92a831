#include "sparsecv/lissa.hpp"

#include "sparsecv/error.hpp"
#include "sparsecv/parallel.hpp"
#include "sparsecv/random.hpp"

#include <chrono>
#include <cmath>

namespace sparsecv {

namespace {

constexpr double kDivergence = 1e8;
constexpr int kPowerIters = 50;

using RowSparse = Eigen::SparseMatrix<double, Eigen::RowMajor>;

// Curvature pieces at theta, with row-major access to the design.
struct Curvature {
  std::variant<Matrix, RowSparse> rows;
  Vector d2;
  Vector reg_diag;  // lambda R'' (or (1/N) lambda R'' in literal mode)
  Index n = 0;
  double s = 1.0;

  Curvature(const Dataset& data, const Regularizer& reg, const Vector& theta,
            const LissaConfig& cfg) {
    if (!reg.twice_differentiable()) {
      throw Error(ErrorKind::kNonDifferentiableRegularizer,
                  "LiSSA needs a twice-differentiable regularizer");
    }
    if (cfg.depth_k < 0) throw Error(ErrorKind::kInvalidArgument, "depth_k must be >= 0");
    if (cfg.repeats_m < 1) throw Error(ErrorKind::kInvalidArgument, "repeats_m must be >= 1");
    if (cfg.scale && !(*cfg.scale > 0.0)) {
      throw Error(ErrorKind::kInvalidArgument, "scale must be > 0");
    }
    n = data.n();
    if (data.x().is_sparse()) {
      rows = RowSparse(data.x().sparse());
    } else {
      rows = data.x().dense();
    }
    Vector d1;
    loss_derivatives(data.family(), data.x().times(theta), data.y(), d1, d2);
    reg_diag = reg.lambda * reg.hessian_diagonal(theta);
    if (cfg.literal_regularizer_term) reg_diag /= static_cast<double>(n);
    s = cfg.scale ? *cfg.scale : lissa_default_scale(data, reg, theta);
  }

  // out = (I - A_m / s) u
  void apply_step(Index m, const Vector& u, Vector& out) const {
    out = u - reg_diag.cwiseProduct(u) / s;
    if (const auto* dense = std::get_if<Matrix>(&rows)) {
      const double c = d2[m] * dense->row(m).dot(u) / s;
      out.noalias() -= c * dense->row(m).transpose();
    } else {
      const RowSparse& x = std::get<RowSparse>(rows);
      double dot = 0.0;
      for (RowSparse::InnerIterator it(x, m); it; ++it) dot += it.value() * u[it.col()];
      const double c = d2[m] * dot / s;
      for (RowSparse::InnerIterator it(x, m); it; ++it) out[it.col()] -= c * it.value();
    }
  }

  Vector run(const Vector& v, int depth, std::uint64_t stream_seed) const {
    const double limit = kDivergence * v.norm();
    Vector h = v;
    Vector tmp(v.size());
    for (int k = 0; k < depth; ++k) {
      const double u = counter_uniform(stream_seed, Stream::kRowSample,
                                       static_cast<std::uint64_t>(k), 0);
      const Index m = std::min(static_cast<Index>(u * static_cast<double>(n)), n - 1);
      apply_step(m, h, tmp);
      h = v + tmp;
      if (!(h.norm() <= limit)) {
        throw Error(ErrorKind::kDivergence,
                    "LiSSA iterate exceeded 1e8 |v| at depth " + std::to_string(k + 1) +
                        "; scale " + std::to_string(s) + " is too small");
      }
    }
    return h;
  }

  Vector average(const Vector& v, const LissaConfig& cfg, std::uint64_t base_seed,
                 bool parallel) const {
    std::vector<Vector> parts(static_cast<std::size_t>(cfg.repeats_m));
    auto body = [&](std::size_t r) {
      parts[r] = run(v, cfg.depth_k, counter_bits(base_seed, Stream::kLissa, r, 0));
    };
    if (parallel) {
      parallel_for(parts.size(), body);
    } else {
      for (std::size_t r = 0; r < parts.size(); ++r) body(r);
    }
    Vector sum = Vector::Zero(v.size());
    for (const Vector& p : parts) sum += p;
    return sum / (static_cast<double>(cfg.repeats_m) * s);
  }
};

}  // namespace

double lissa_default_scale(const Dataset& data, const Regularizer& reg, const Vector& theta) {
  Vector d1, d2;
  loss_derivatives(data.family(), data.x().times(theta), data.y(), d1, d2);
  const Vector reg_diag = reg.lambda * reg.hessian_diagonal(theta);
  const double big_n = static_cast<double>(data.n());

  Vector u = Vector::Constant(data.d(), 1.0 / std::sqrt(static_cast<double>(data.d())));
  double op = 0.0;
  for (int it = 0; it < kPowerIters; ++it) {
    Vector hu = data.x().transpose_times(d2.cwiseProduct(data.x().times(u))) / big_n;
    hu += reg_diag.cwiseProduct(u);
    op = hu.norm();
    if (op == 0.0) break;
    u = hu / op;
  }

  // Row squared norms.
  const Vector row_sq = data.x().visit([&](const auto& x) -> Vector {
    using M = std::decay_t<decltype(x)>;
    if constexpr (std::is_same_v<M, Matrix>) {
      return x.rowwise().squaredNorm();
    } else {
      Vector out = Vector::Zero(x.rows());
      for (Index d = 0; d < x.outerSize(); ++d) {
        for (typename M::InnerIterator it(x, d); it; ++it) out[it.row()] += it.value() * it.value();
      }
      return out;
    }
  });
  const double sample_max =
      d2.cwiseProduct(row_sq).maxCoeff() + (reg_diag.size() > 0 ? reg_diag.maxCoeff() : 0.0);
  const double s = 1.1 * std::max(op, sample_max);
  return s > 0.0 ? s : 1.0;
}

Vector lissa_inverse_hvp(const Dataset& data, const Regularizer& reg, const Vector& theta,
                         const Vector& v, const LissaConfig& cfg) {
  if (v.size() != data.d() || theta.size() != data.d()) {
    throw Error(ErrorKind::kInvalidArgument, "vector length does not match D");
  }
  const Curvature curv(data, reg, theta, cfg);
  return curv.average(v, cfg, cfg.seed, true);
}

LooSet ij_full_lissa(const Dataset& data, const Regularizer& reg, const FitResult& fit,
                     const LissaConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  const Curvature curv(data, reg, fit.theta, cfg);
  Vector d1, d2;
  loss_derivatives(data.family(), data.x().times(fit.theta), data.y(), d1, d2);
  const double big_n = static_cast<double>(data.n());

  LooSet out;
  out.method = LooMethod::kIjLissa;
  out.thetas = Matrix::Zero(data.d(), data.n());
  parallel_for(static_cast<std::size_t>(data.n()), [&](std::size_t i) {
    const Index n = static_cast<Index>(i);
    const Vector grad = d1[n] * data.x().row(n);
    const std::uint64_t seed_n = counter_bits(cfg.seed, Stream::kLissa, i, 1);
    out.thetas.col(n) = fit.theta + curv.average(grad, cfg, seed_n, false) / big_n;
  });
  out.available.assign(static_cast<std::size_t>(data.n()), 1);
  out.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace sparsecv
