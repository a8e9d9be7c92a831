#pragma once

#include "sparsecv/glm.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include <memory>

namespace sparsecv {

/// Reusable factorization of a symmetric positive-definite matrix.
///
/// Two storage modes: a dense D x D factor, and a diagonal-plus-low-rank
/// form diag(lam) + U U^T used when D exceeds N. Solves are read-only and
/// safe to call concurrently.
class HessianFactor {
 public:
  /// Cholesky with a column-pivoted QR fallback. Throws singular-hessian
  /// when even the QR factor is numerically rank deficient.
  static HessianFactor dense(const Matrix& h);

  /// Factor of diag(lam) + U U^T with lam >= 0.
  static HessianFactor diagonal_plus_low_rank(const Vector& lam, const Matrix& u);

  /// Hessian of the regularized objective at theta, choosing the storage
  /// mode from the problem shape.
  static HessianFactor for_objective(const Dataset& data, const Regularizer& reg,
                                     const Vector& theta,
                                     std::optional<Index> exclude = std::nullopt);

  Index dim() const { return dim_; }
  bool low_rank() const { return low_rank_ != nullptr; }
  /// True when the Cholesky factorization failed and QR was used.
  bool used_fallback() const { return used_fallback_; }
  /// Smallest |pivot| of the factorization actually used.
  double smallest_pivot() const { return smallest_pivot_; }

  Vector solve(const Vector& b) const;
  Matrix solve(const Matrix& b) const;
  /// The factored matrix, multiplied back out from its factors.
  Matrix reconstruct() const;

 private:
  struct LowRank;

  Matrix dense_solve(const Matrix& b) const;

  Index dim_ = 0;
  bool used_fallback_ = false;
  double smallest_pivot_ = 0.0;
  std::shared_ptr<const Matrix> h_;
  Eigen::LLT<Matrix> llt_;
  Eigen::ColPivHouseholderQR<Matrix> qr_;
  std::shared_ptr<const LowRank> low_rank_;
};

/// Shape rule used by for_objective: low-rank storage when D > N and D is
/// large enough that a dense D x D factor is costly.
bool prefers_low_rank(Index n, Index d);

}  // namespace sparsecv
