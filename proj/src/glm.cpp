#include "sparsecv/glm.hpp"

#include "sparsecv/error.hpp"

#include <algorithm>
#include <cmath>

namespace sparsecv {

std::string to_string(Family family) {
  return family == Family::kLinear ? "linear" : "logistic";
}

Family family_from_string(const std::string& name) {
  if (name == "linear") return Family::kLinear;
  if (name == "logistic") return Family::kLogistic;
  throw Error(ErrorKind::kInvalidArgument, "unknown family '" + name + "'");
}

std::string to_string(RegKind kind) {
  switch (kind) {
    case RegKind::kL1: return "l1";
    case RegKind::kL2: return "l2";
    case RegKind::kSmoothedL1: return "smoothed-l1";
  }
  return "l1";
}

RegKind reg_kind_from_string(const std::string& name) {
  if (name == "l1") return RegKind::kL1;
  if (name == "l2") return RegKind::kL2;
  if (name == "smoothed-l1") return RegKind::kSmoothedL1;
  throw Error(ErrorKind::kInvalidArgument, "unknown regularizer '" + name + "'");
}

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double sigmoid_slope(double x) {
  const double e = std::exp(-std::abs(x));
  const double denom = 1.0 + e;
  return e / (denom * denom);
}

namespace {

void check_label(Family family, double y) {
  if (family == Family::kLogistic && y != 1.0 && y != -1.0) {
    throw Error(ErrorKind::kInvalidLabel,
                "logistic label must be -1 or +1, got " + std::to_string(y));
  }
}

}  // namespace

double loss_value(Family family, double z, double y) {
  check_label(family, y);
  if (family == Family::kLinear) {
    const double r = z - y;
    return 0.5 * r * r;
  }
  return softplus(-y * z);
}

LossDerivatives loss_d1_d2(Family family, double z, double y) {
  check_label(family, y);
  if (family == Family::kLinear) return {z - y, 1.0};
  // -y / (1 + e^{yz}) = -y * sigmoid(-yz); d2 does not depend on the label.
  return {-y * sigmoid(-y * z), sigmoid_slope(z)};
}

Regularizer Regularizer::l1(double lambda) { return {RegKind::kL1, lambda, 100.0}; }
Regularizer Regularizer::l2(double lambda) { return {RegKind::kL2, lambda, 100.0}; }
Regularizer Regularizer::smoothed_l1(double lambda, double eta) {
  if (!(eta > 0)) throw Error(ErrorKind::kInvalidArgument, "eta must be positive");
  return {RegKind::kSmoothedL1, lambda, eta};
}

double Regularizer::value(const Vector& theta) const {
  switch (kind) {
    case RegKind::kL1: return theta.lpNorm<1>();
    case RegKind::kL2: return theta.squaredNorm();
    case RegKind::kSmoothedL1: {
      double total = 0.0;
      for (Index d = 0; d < theta.size(); ++d) {
        const double u = eta * theta[d];
        total += softplus(u) + softplus(-u);
      }
      return total / eta;
    }
  }
  return 0.0;
}

Vector Regularizer::gradient(const Vector& theta) const {
  switch (kind) {
    case RegKind::kL1:
      throw Error(ErrorKind::kNonDifferentiableRegularizer, "L1 has no gradient");
    case RegKind::kL2: return 2.0 * theta;
    case RegKind::kSmoothedL1:
      return theta.unaryExpr([this](double t) { return std::tanh(0.5 * eta * t); });
  }
  return {};
}

Vector Regularizer::hessian_diagonal(const Vector& theta) const {
  switch (kind) {
    case RegKind::kL1:
      throw Error(ErrorKind::kNonDifferentiableRegularizer, "L1 has no Hessian");
    case RegKind::kL2: return Vector::Constant(theta.size(), 2.0);
    case RegKind::kSmoothedL1:
      return theta.unaryExpr([this](double t) { return 2.0 * eta * sigmoid_slope(eta * t); });
  }
  return {};
}

// ---------------------------------------------------------------------------
// Design

Design::Design(Matrix dense) : storage_(std::move(dense)) {}

Design::Design(SparseMatrix sparse) : storage_(std::move(sparse)) {
  std::get<SparseMatrix>(storage_).makeCompressed();
}

Design Design::automatic(SparseMatrix x) {
  x.makeCompressed();
  const double cells = static_cast<double>(x.rows()) * static_cast<double>(x.cols());
  const double density = cells > 0 ? static_cast<double>(x.nonZeros()) / cells : 0.0;
  if (density > kDenseThreshold) return Design(Matrix(x));
  return Design(std::move(x));
}

Index Design::rows() const {
  return visit([](const auto& m) { return static_cast<Index>(m.rows()); });
}

Index Design::cols() const {
  return visit([](const auto& m) { return static_cast<Index>(m.cols()); });
}

double Design::density() const {
  const double cells = static_cast<double>(rows()) * static_cast<double>(cols());
  if (cells == 0) return 0.0;
  if (is_sparse()) return static_cast<double>(sparse().nonZeros()) / cells;
  return static_cast<double>((dense().array() != 0.0).count()) / cells;
}

Vector Design::times(const Vector& theta) const {
  Vector z = Vector::Zero(rows());
  if (is_sparse()) {
    const SparseMatrix& x = sparse();
    for (Index j = 0; j < x.cols(); ++j) {
      const double t = theta[j];
      if (t == 0.0) continue;
      for (SparseMatrix::InnerIterator it(x, j); it; ++it) z[it.row()] += it.value() * t;
    }
  } else {
    const Matrix& x = dense();
    for (Index j = 0; j < x.cols(); ++j) {
      const double t = theta[j];
      if (t != 0.0) z.noalias() += t * x.col(j);
    }
  }
  return z;
}

Vector Design::transpose_times(const Vector& v) const {
  return visit([&](const auto& x) -> Vector { return x.transpose() * v; });
}

Matrix Design::columns(std::span<const Index> cols) const {
  Matrix out(rows(), static_cast<Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) {
    if (is_sparse()) {
      out.col(static_cast<Index>(k)) = Vector(sparse().col(cols[k]));
    } else {
      out.col(static_cast<Index>(k)) = dense().col(cols[k]);
    }
  }
  return out;
}

Design Design::select_columns(std::span<const Index> cols) const {
  if (!is_sparse()) return Design(columns(cols));
  const SparseMatrix& x = sparse();
  std::vector<Eigen::Triplet<double>> triplets;
  for (std::size_t k = 0; k < cols.size(); ++k) {
    for (SparseMatrix::InnerIterator it(x, cols[k]); it; ++it) {
      triplets.emplace_back(it.row(), static_cast<Index>(k), it.value());
    }
  }
  SparseMatrix out(x.rows(), static_cast<Index>(cols.size()));
  out.setFromTriplets(triplets.begin(), triplets.end());
  return Design(std::move(out));
}

Design Design::select_rows(std::span<const Index> row_ids) const {
  const Index k = static_cast<Index>(row_ids.size());
  if (!is_sparse()) {
    Matrix out(k, cols());
    for (Index r = 0; r < k; ++r) out.row(r) = dense().row(row_ids[r]);
    return Design(std::move(out));
  }
  std::vector<Index> position(rows(), -1);
  for (Index r = 0; r < k; ++r) position[row_ids[r]] = r;
  const SparseMatrix& x = sparse();
  std::vector<Eigen::Triplet<double>> triplets;
  for (Index j = 0; j < x.cols(); ++j) {
    for (SparseMatrix::InnerIterator it(x, j); it; ++it) {
      if (position[it.row()] >= 0) triplets.emplace_back(position[it.row()], j, it.value());
    }
  }
  SparseMatrix out(k, x.cols());
  out.setFromTriplets(triplets.begin(), triplets.end());
  return Design(std::move(out));
}

Vector Design::row(Index n) const {
  if (!is_sparse()) return dense().row(n).transpose();
  Vector out = Vector::Zero(cols());
  const SparseMatrix& x = sparse();
  for (Index j = 0; j < x.cols(); ++j) out[j] = x.coeff(n, j);
  return out;
}

double Design::coeff(Index n, Index d) const {
  return is_sparse() ? sparse().coeff(n, d) : dense()(n, d);
}

Matrix Design::to_dense() const { return is_sparse() ? Matrix(sparse()) : dense(); }

Vector Design::column_sq_norms() const {
  Vector out(cols());
  for (Index j = 0; j < cols(); ++j) {
    out[j] = is_sparse() ? sparse().col(j).squaredNorm() : dense().col(j).squaredNorm();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Dataset

Dataset::Dataset(Design x, Vector y, Family family)
    : x_(std::move(x)), y_(std::move(y)), family_(family) {
  if (x_.rows() < 1 || x_.cols() < 1) {
    throw Error(ErrorKind::kInvalidArgument, "dataset needs N >= 1 and D >= 1");
  }
  if (y_.size() != x_.rows()) {
    throw Error(ErrorKind::kInvalidArgument, "response length does not match design rows");
  }
  if (family_ == Family::kLogistic) {
    for (Index n = 0; n < y_.size(); ++n) check_label(family_, y_[n]);
  }
}

Dataset Dataset::select_columns(std::span<const Index> cols) const {
  return Dataset(x_.select_columns(cols), y_, family_);
}

Dataset Dataset::select_rows(std::span<const Index> rows) const {
  Vector y(static_cast<Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) y[static_cast<Index>(r)] = y_[rows[r]];
  return Dataset(x_.select_rows(rows), std::move(y), family_);
}

// ---------------------------------------------------------------------------
// Objective pieces

void check_index(const Dataset& data, std::optional<Index> exclude) {
  if (exclude && (*exclude < 0 || *exclude >= data.n())) {
    throw Error(ErrorKind::kIndexOutOfRange,
                "excluded index " + std::to_string(*exclude) + " outside [0, N)");
  }
}

void loss_derivatives(Family family, const Vector& z, const Vector& y, Vector& d1,
                      Vector& d2) {
  d1.resize(z.size());
  d2.resize(z.size());
  for (Index n = 0; n < z.size(); ++n) {
    const LossDerivatives ld = loss_d1_d2(family, z[n], y[n]);
    d1[n] = ld.d1;
    d2[n] = ld.d2;
  }
}

double objective_from_margins(const Dataset& data, const Regularizer& reg,
                              const Vector& theta, const Vector& z,
                              std::optional<Index> exclude) {
  check_index(data, exclude);
  double total = 0.0;
  for (Index n = 0; n < data.n(); ++n) {
    if (exclude && *exclude == n) continue;
    total += loss_value(data.family(), z[n], data.y()[n]);
  }
  const double penalty = reg.lambda == 0.0 ? 0.0 : reg.lambda * reg.value(theta);
  return total / static_cast<double>(data.n()) + penalty;
}

double objective_value(const Dataset& data, const Regularizer& reg, const Vector& theta,
                       std::optional<Index> exclude) {
  if (theta.size() != data.d()) {
    throw Error(ErrorKind::kInvalidArgument, "theta length does not match D");
  }
  return objective_from_margins(data, reg, theta, data.x().times(theta), exclude);
}

Vector loss_gradient(const Dataset& data, const Vector& theta, std::optional<Index> exclude) {
  check_index(data, exclude);
  const Vector z = data.x().times(theta);
  Vector d1, d2;
  loss_derivatives(data.family(), z, data.y(), d1, d2);
  if (exclude) d1[*exclude] = 0.0;
  return data.x().transpose_times(d1) / static_cast<double>(data.n());
}

Vector objective_gradient(const Dataset& data, const Regularizer& reg, const Vector& theta,
                          std::optional<Index> exclude) {
  if (!reg.twice_differentiable()) {
    throw Error(ErrorKind::kNonDifferentiableRegularizer,
                "objective gradient undefined for the L1 regularizer");
  }
  Vector g = loss_gradient(data, theta, exclude);
  if (reg.lambda != 0.0) g += reg.lambda * reg.gradient(theta);
  return g;
}

Matrix restricted_hessian(const Dataset& data, const Vector& theta, std::span<const Index> s,
                          std::optional<Index> exclude) {
  check_index(data, exclude);
  for (Index j : s) {
    if (j < 0 || j >= data.d()) {
      throw Error(ErrorKind::kIndexOutOfRange, "support index outside [0, D)");
    }
  }
  const Vector z = data.x().times(theta);
  Vector d1, d2;
  loss_derivatives(data.family(), z, data.y(), d1, d2);
  if (exclude) d2[*exclude] = 0.0;
  const Matrix xs = data.x().columns(s);
  Matrix h = xs.transpose() * d2.asDiagonal() * xs;
  h /= static_cast<double>(data.n());
  return 0.5 * (h + h.transpose());
}

Matrix full_hessian(const Dataset& data, const Regularizer& reg, const Vector& theta,
                    std::optional<Index> exclude) {
  if (!reg.twice_differentiable()) {
    throw Error(ErrorKind::kNonDifferentiableRegularizer, "L1 has no Hessian");
  }
  check_index(data, exclude);
  const Vector z = data.x().times(theta);
  Vector d1, d2;
  loss_derivatives(data.family(), z, data.y(), d1, d2);
  if (exclude) d2[*exclude] = 0.0;
  const Matrix x = data.x().to_dense();
  const Matrix weighted = d2.cwiseSqrt().asDiagonal() * x;
  Matrix h = Matrix::Zero(data.d(), data.d());
  h.selfadjointView<Eigen::Lower>().rankUpdate(weighted.transpose(),
                                               1.0 / static_cast<double>(data.n()));
  h = h.selfadjointView<Eigen::Lower>();
  if (reg.lambda != 0.0) h.diagonal() += reg.lambda * reg.hessian_diagonal(theta);
  return h;
}

}  // namespace sparsecv
