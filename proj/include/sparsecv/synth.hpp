#pragma once

#include "sparsecv/glm.hpp"

#include <cstdint>
#include <string>

namespace sparsecv {

enum class ThetaMode { kUnit, kGaussian };

ThetaMode theta_mode_from_string(const std::string& name);

/// N x D matrix of standard normals; entry (n, d) depends only on (seed, n, d).
Matrix gen_design(Index n, Index d, std::uint64_t seed);

/// First deff entries set (all 1, or N(0, 1) draws redrawn on an exact zero),
/// the rest zero.
Vector gen_theta_star(Index d, Index deff, ThetaMode mode, std::uint64_t seed);

/// Linear: X theta* + noise_sigma * N(0, 1). Logistic: +1 with probability
/// sigmoid(x_n^T theta*), else -1.
Vector gen_responses(const Matrix& x, const Vector& theta_star, Family family,
                     double noise_sigma, std::uint64_t seed);

/// Convenience wrapper around the three generators.
struct SyntheticSpec {
  Index n = 100;
  Index d = 10;
  Index deff = 5;
  Family family = Family::kLinear;
  ThetaMode theta_mode = ThetaMode::kUnit;
  double noise_sigma = 1.0;
};

struct SyntheticProblem {
  Dataset data;
  Vector theta_star;
};

SyntheticProblem make_synthetic(const SyntheticSpec& spec, std::uint64_t seed);

}  // namespace sparsecv
