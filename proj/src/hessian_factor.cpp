#include "sparsecv/hessian_factor.hpp"

#include "sparsecv/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace sparsecv {

namespace {

// Cholesky pivots below this fraction of the largest trigger the QR fallback.
constexpr double kPivotRatio = 1e-14;
// Diagonal entries below this fraction of the largest are eliminated through
// a Schur complement instead of being inverted directly.
constexpr double kStiffRatio = 1e-6;
constexpr Index kDenseLimit = 1500;

[[noreturn]] void throw_singular(double pivot) {
  std::ostringstream msg;
  msg << "Hessian is numerically singular (smallest pivot " << pivot << ")";
  throw Error(ErrorKind::kSingularHessian, msg.str());
}

double min_llt_pivot(const Eigen::LLT<Matrix>& llt) {
  const Matrix& l = llt.matrixLLT();
  return l.diagonal().cwiseAbs2().minCoeff();
}

double max_llt_pivot(const Eigen::LLT<Matrix>& llt) {
  return llt.matrixLLT().diagonal().cwiseAbs2().maxCoeff();
}

bool llt_ok(const Eigen::LLT<Matrix>& llt) {
  if (llt.info() != Eigen::Success) return false;
  if (llt.matrixLLT().rows() == 0) return true;
  const double lo = min_llt_pivot(llt);
  return std::isfinite(lo) && lo > kPivotRatio * max_llt_pivot(llt);
}

}  // namespace

struct HessianFactor::LowRank {
  IndexSet stiff;
  IndexSet soft;
  Vector lam_soft_inv;
  Matrix u_stiff;
  Matrix u_soft;
  // lam_soft^{-1} U_soft
  Matrix w_soft;
  Eigen::LLT<Matrix> m_llt;
  Eigen::LLT<Matrix> s_llt;
  Vector lam;

  Matrix solve(const Matrix& g) const {
    const Index cols = g.cols();
    Matrix g_stiff(static_cast<Index>(stiff.size()), cols);
    Matrix g_soft(static_cast<Index>(soft.size()), cols);
    for (std::size_t i = 0; i < stiff.size(); ++i) g_stiff.row(i) = g.row(stiff[i]);
    for (std::size_t i = 0; i < soft.size(); ++i) g_soft.row(i) = g.row(soft[i]);

    Matrix p_stiff(static_cast<Index>(stiff.size()), cols);
    if (!stiff.empty()) {
      const Matrix q = w_soft.transpose() * g_soft;
      const Matrix rhs = g_stiff - u_stiff * m_llt.solve(q);
      p_stiff = s_llt.solve(rhs);
      g_soft.noalias() -= u_soft * (u_stiff.transpose() * p_stiff);
    }
    // Woodbury on the soft block.
    Matrix p_soft = lam_soft_inv.asDiagonal() * g_soft;
    p_soft.noalias() -= w_soft * m_llt.solve(w_soft.transpose() * g_soft);

    Matrix out(g.rows(), cols);
    for (std::size_t i = 0; i < stiff.size(); ++i) out.row(stiff[i]) = p_stiff.row(i);
    for (std::size_t i = 0; i < soft.size(); ++i) out.row(soft[i]) = p_soft.row(i);
    return out;
  }
};

bool prefers_low_rank(Index n, Index d) { return d > n && d > kDenseLimit; }

HessianFactor HessianFactor::dense(const Matrix& h) {
  if (h.rows() != h.cols()) throw Error(ErrorKind::kInvalidArgument, "Hessian must be square");
  HessianFactor f;
  f.dim_ = h.rows();
  f.h_ = std::make_shared<const Matrix>(h);
  f.llt_.compute(h);
  if (llt_ok(f.llt_)) {
    f.smallest_pivot_ = f.dim_ > 0 ? min_llt_pivot(f.llt_) : 0.0;
    return f;
  }
  f.used_fallback_ = true;
  f.qr_.compute(h);
  const Vector r = f.qr_.matrixQR().diagonal().cwiseAbs();
  f.smallest_pivot_ = r.size() > 0 ? r.minCoeff() : 0.0;
  if (f.qr_.rank() < f.dim_) throw_singular(f.smallest_pivot_);
  return f;
}

HessianFactor HessianFactor::diagonal_plus_low_rank(const Vector& lam, const Matrix& u) {
  if (u.rows() != lam.size()) {
    throw Error(ErrorKind::kInvalidArgument, "low-rank factor shape does not match diagonal");
  }
  if ((lam.array() < 0.0).any()) {
    throw Error(ErrorKind::kInvalidArgument, "diagonal must be nonnegative");
  }
  auto lr = std::make_shared<LowRank>();
  lr->lam = lam;
  const double top = lam.size() > 0 ? lam.maxCoeff() : 0.0;
  for (Index d = 0; d < lam.size(); ++d) {
    if (top == 0.0 || lam[d] <= kStiffRatio * top) {
      lr->stiff.push_back(d);
    } else {
      lr->soft.push_back(d);
    }
  }
  const Index k = u.cols();
  lr->u_stiff.resize(static_cast<Index>(lr->stiff.size()), k);
  lr->u_soft.resize(static_cast<Index>(lr->soft.size()), k);
  lr->lam_soft_inv.resize(static_cast<Index>(lr->soft.size()));
  for (std::size_t i = 0; i < lr->stiff.size(); ++i) lr->u_stiff.row(i) = u.row(lr->stiff[i]);
  for (std::size_t i = 0; i < lr->soft.size(); ++i) {
    lr->u_soft.row(i) = u.row(lr->soft[i]);
    lr->lam_soft_inv[i] = 1.0 / lam[lr->soft[i]];
  }
  lr->w_soft = lr->lam_soft_inv.asDiagonal() * lr->u_soft;

  Matrix m = Matrix::Identity(k, k);
  m.noalias() += lr->u_soft.transpose() * lr->w_soft;
  lr->m_llt.compute(m);
  if (!llt_ok(lr->m_llt)) throw_singular(k > 0 ? min_llt_pivot(lr->m_llt) : 0.0);
  double pivot = k > 0 ? min_llt_pivot(lr->m_llt) : 1.0;

  if (!lr->stiff.empty()) {
    Matrix s = lr->u_stiff * lr->m_llt.solve(lr->u_stiff.transpose());
    for (std::size_t i = 0; i < lr->stiff.size(); ++i) s(i, i) += lam[lr->stiff[i]];
    s = 0.5 * (s + s.transpose()).eval();
    lr->s_llt.compute(s);
    const double sp = min_llt_pivot(lr->s_llt);
    if (!llt_ok(lr->s_llt)) throw_singular(sp);
    pivot = std::min(pivot, sp);
  }

  HessianFactor f;
  f.dim_ = lam.size();
  f.smallest_pivot_ = pivot;
  f.low_rank_ = std::move(lr);
  return f;
}

HessianFactor HessianFactor::for_objective(const Dataset& data, const Regularizer& reg,
                                           const Vector& theta, std::optional<Index> exclude) {
  if (!reg.twice_differentiable()) {
    throw Error(ErrorKind::kNonDifferentiableRegularizer,
                "Hessian requires a twice-differentiable regularizer");
  }
  if (!prefers_low_rank(data.n(), data.d())) {
    return dense(full_hessian(data, reg, theta, exclude));
  }
  check_index(data, exclude);
  Vector d1, d2;
  loss_derivatives(data.family(), data.x().times(theta), data.y(), d1, d2);
  const double n = static_cast<double>(data.n());
  Vector root = (d2 / n).cwiseSqrt();
  if (exclude) root[*exclude] = 0.0;
  const Matrix u = data.x().visit([&](const auto& x) -> Matrix {
    return x.transpose() * root.asDiagonal();
  });
  return diagonal_plus_low_rank(reg.lambda * reg.hessian_diagonal(theta), u);
}

Vector HessianFactor::solve(const Vector& b) const {
  if (b.size() != dim_) throw Error(ErrorKind::kInvalidArgument, "solve: size mismatch");
  if (low_rank_) return low_rank_->solve(b);
  return dense_solve(b);
}

Matrix HessianFactor::solve(const Matrix& b) const {
  if (b.rows() != dim_) throw Error(ErrorKind::kInvalidArgument, "solve: size mismatch");
  if (low_rank_) return low_rank_->solve(b);
  return dense_solve(b);
}

// One round of iterative refinement against the stored matrix.
Matrix HessianFactor::dense_solve(const Matrix& b) const {
  auto raw = [&](const Matrix& rhs) -> Matrix {
    return used_fallback_ ? Matrix(qr_.solve(rhs)) : Matrix(llt_.solve(rhs));
  };
  Matrix x = raw(b);
  Matrix r = b;
  r.noalias() -= *h_ * x;
  x += raw(r);
  return x;
}

Matrix HessianFactor::reconstruct() const {
  if (low_rank_) {
    const LowRank& lr = *low_rank_;
    Matrix u(dim_, lr.u_soft.cols());
    for (std::size_t i = 0; i < lr.stiff.size(); ++i) u.row(lr.stiff[i]) = lr.u_stiff.row(i);
    for (std::size_t i = 0; i < lr.soft.size(); ++i) u.row(lr.soft[i]) = lr.u_soft.row(i);
    Matrix h = u * u.transpose();
    h.diagonal() += lr.lam;
    return h;
  }
  if (used_fallback_) {
    const Matrix r = qr_.matrixQR().triangularView<Eigen::Upper>();
    return Matrix(qr_.householderQ()) * r * qr_.colsPermutation().transpose();
  }
  const Matrix l = llt_.matrixL();
  return l * l.transpose();
}

}  // namespace sparsecv
