#include "sparsecv/synth.hpp"

#include "sparsecv/error.hpp"
#include "sparsecv/random.hpp"

namespace sparsecv {

ThetaMode theta_mode_from_string(const std::string& name) {
  if (name == "unit") return ThetaMode::kUnit;
  if (name == "gaussian") return ThetaMode::kGaussian;
  throw Error(ErrorKind::kInvalidArgument, "unknown theta mode: " + name);
}

Matrix gen_design(Index n, Index d, std::uint64_t seed) {
  if (n < 0 || d < 0) throw Error(ErrorKind::kInvalidArgument, "negative dimension");
  Matrix x(n, d);
  for (Index j = 0; j < d; ++j) {
    for (Index i = 0; i < n; ++i) {
      x(i, j) = counter_normal(seed, Stream::kDesign, static_cast<std::uint64_t>(i),
                               static_cast<std::uint64_t>(j));
    }
  }
  return x;
}

Vector gen_theta_star(Index d, Index deff, ThetaMode mode, std::uint64_t seed) {
  if (deff < 0 || deff > d) throw Error(ErrorKind::kInvalidArgument, "need 0 <= deff <= d");
  Vector theta = Vector::Zero(d);
  for (Index j = 0; j < deff; ++j) {
    if (mode == ThetaMode::kUnit) {
      theta[j] = 1.0;
      continue;
    }
    double v = 0.0;
    for (std::uint64_t attempt = 0; v == 0.0; ++attempt) {
      v = counter_normal(seed, Stream::kTheta, static_cast<std::uint64_t>(j), attempt);
    }
    theta[j] = v;
  }
  return theta;
}

Vector gen_responses(const Matrix& x, const Vector& theta_star, Family family,
                     double noise_sigma, std::uint64_t seed) {
  if (x.cols() != theta_star.size()) {
    throw Error(ErrorKind::kInvalidArgument, "theta_star length does not match columns");
  }
  if (!(noise_sigma >= 0.0)) throw Error(ErrorKind::kInvalidArgument, "noise_sigma must be >= 0");
  const Vector z = x * theta_star;
  Vector y(x.rows());
  for (Index i = 0; i < x.rows(); ++i) {
    const auto row = static_cast<std::uint64_t>(i);
    if (family == Family::kLinear) {
      y[i] = z[i] + (noise_sigma == 0.0 ? 0.0 : noise_sigma * counter_normal(seed, Stream::kNoise, row, 0));
    } else {
      y[i] = counter_uniform(seed, Stream::kLabel, row, 0) < sigmoid(z[i]) ? 1.0 : -1.0;
    }
  }
  return y;
}

SyntheticProblem make_synthetic(const SyntheticSpec& spec, std::uint64_t seed) {
  Matrix x = gen_design(spec.n, spec.d, seed);
  Vector theta = gen_theta_star(spec.d, spec.deff, spec.theta_mode, seed);
  Vector y = gen_responses(x, theta, spec.family, spec.noise_sigma, seed);
  return {Dataset(Design(std::move(x)), std::move(y), spec.family), std::move(theta)};
}

}  // namespace sparsecv
