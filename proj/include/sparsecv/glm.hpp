#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace sparsecv {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor>;
/// Sorted set of coordinate indices.
using IndexSet = std::vector<Index>;

enum class Family { kLinear, kLogistic };

std::string to_string(Family family);
Family family_from_string(const std::string& name);

// Overflow-safe scalar helpers.
double softplus(double x);
double sigmoid(double x);
/// sigmoid(x) * (1 - sigmoid(x)) without cancellation for large |x|.
double sigmoid_slope(double x);

struct LossDerivatives {
  double d1;
  double d2;
};

/// f(z, y): 0.5 (z - y)^2 for linear, log(1 + exp(-y z)) for logistic.
double loss_value(Family family, double z, double y);

/// First and second derivatives of f with respect to z.
LossDerivatives loss_d1_d2(Family family, double z, double y);

enum class RegKind { kL1, kL2, kSmoothedL1 };

std::string to_string(RegKind kind);
RegKind reg_kind_from_string(const std::string& name);

/// lambda * R(theta). R is |theta|_1, |theta|_2^2 or the softplus smoothing
/// of |theta|_1 with sharpness eta.
struct Regularizer {
  RegKind kind = RegKind::kL1;
  double lambda = 0.0;
  double eta = 100.0;

  static Regularizer l1(double lambda);
  static Regularizer l2(double lambda);
  static Regularizer smoothed_l1(double lambda, double eta = 100.0);

  bool twice_differentiable() const { return kind != RegKind::kL1; }

  /// R(theta), without the lambda factor. SmoothedL1 keeps its additive
  /// constant 2 log(2) / eta per coordinate.
  double value(const Vector& theta) const;
  /// Gradient of R, without lambda. Throws for L1.
  Vector gradient(const Vector& theta) const;
  /// Diagonal of the Hessian of R, without lambda. Throws for L1.
  Vector hessian_diagonal(const Vector& theta) const;
};

/// N x D design matrix, stored dense or compressed-sparse-column.
class Design {
 public:
  /// Storage switches to dense above this fraction of nonzeros.
  static constexpr double kDenseThreshold = 0.25;

  Design() = default;
  explicit Design(Matrix dense);
  explicit Design(SparseMatrix sparse);

  /// Picks dense storage when the density exceeds kDenseThreshold.
  static Design automatic(SparseMatrix x);

  Index rows() const;
  Index cols() const;
  bool is_sparse() const { return std::holds_alternative<SparseMatrix>(storage_); }
  double density() const;

  const Matrix& dense() const { return std::get<Matrix>(storage_); }
  const SparseMatrix& sparse() const { return std::get<SparseMatrix>(storage_); }

  template <class F>
  decltype(auto) visit(F&& f) const {
    return std::visit(std::forward<F>(f), storage_);
  }

  /// X theta; skips zero entries of theta.
  Vector times(const Vector& theta) const;
  /// X^T v.
  Vector transpose_times(const Vector& v) const;
  /// Dense N x |cols| copy of the selected columns, in the given order.
  Matrix columns(std::span<const Index> cols) const;
  /// Design restricted to the selected columns, same storage kind.
  Design select_columns(std::span<const Index> cols) const;
  /// Design restricted to the selected rows, same storage kind.
  Design select_rows(std::span<const Index> rows) const;
  /// Row n as a dense length-D vector.
  Vector row(Index n) const;
  double coeff(Index n, Index d) const;
  Matrix to_dense() const;
  /// Squared l2 norm of every column.
  Vector column_sq_norms() const;

 private:
  std::variant<Matrix, SparseMatrix> storage_;
};

/// The (X, y) pair plus GLM family. Immutable after construction.
class Dataset {
 public:
  Dataset(Design x, Vector y, Family family);

  const Design& x() const { return x_; }
  const Vector& y() const { return y_; }
  Family family() const { return family_; }
  Index n() const { return x_.rows(); }
  Index d() const { return x_.cols(); }

  Dataset select_columns(std::span<const Index> cols) const;
  Dataset select_rows(std::span<const Index> rows) const;

 private:
  Design x_;
  Vector y_;
  Family family_;
};

struct FitResult {
  Vector theta;
  IndexSet support;
  double objective_value = 0.0;
  int iterations = 0;
  bool converged = false;
  /// Max KKT residual for L1 fits; gradient 2-norm for smooth fits.
  double kkt_violation = 0.0;
  std::vector<std::string> notes;
  /// Objective after each accepted outer step, starting point first.
  std::vector<double> objective_trace;
};

/// Per-row derivative vectors d1_n, d2_n at margins z = X theta.
void loss_derivatives(Family family, const Vector& z, const Vector& y, Vector& d1,
                      Vector& d2);

/// (1/N) sum_{m != exclude} f(x_m^T theta, y_m) + lambda R(theta).
/// The divisor stays N when a point is excluded.
double objective_value(const Dataset& data, const Regularizer& reg, const Vector& theta,
                       std::optional<Index> exclude = std::nullopt);

/// Same, from precomputed margins z = X theta.
double objective_from_margins(const Dataset& data, const Regularizer& reg,
                              const Vector& theta, const Vector& z,
                              std::optional<Index> exclude = std::nullopt);

/// Gradient of objective_value. Requires a twice-differentiable regularizer.
Vector objective_gradient(const Dataset& data, const Regularizer& reg, const Vector& theta,
                          std::optional<Index> exclude = std::nullopt);

/// Gradient of the unregularized data term (1/N) sum_{m != exclude} f_m.
Vector loss_gradient(const Dataset& data, const Vector& theta,
                     std::optional<Index> exclude = std::nullopt);

/// (1/N) sum_{m != exclude} d2_m x_{m,s} x_{m,s}^T. Unregularized.
Matrix restricted_hessian(const Dataset& data, const Vector& theta, std::span<const Index> s,
                          std::optional<Index> exclude = std::nullopt);

/// Full D x D Hessian of the objective including lambda * curvature of R.
Matrix full_hessian(const Dataset& data, const Regularizer& reg, const Vector& theta,
                    std::optional<Index> exclude = std::nullopt);

void check_index(const Dataset& data, std::optional<Index> exclude);

}  // namespace sparsecv
