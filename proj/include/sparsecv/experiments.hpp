#pragma once

#include "sparsecv/dataset_io.hpp"
#include "sparsecv/exact_cv.hpp"
#include "sparsecv/lissa.hpp"
#include "sparsecv/report.hpp"
#include "sparsecv/synth.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace sparsecv {

/// Either an absolute lambda or c * sqrt(log D / N).
struct LambdaRule {
  bool absolute = false;
  double value = 1.0;

  double resolve(Index n, Index d) const;
};

struct ExperimentConfig {
  /// fit | cv | scaling | sparse-sim | support-sweep | lambda-sweep |
  /// lissa-frontier | audit
  std::string experiment = "cv";
  /// Dataset file; synthetic data is generated when empty.
  std::optional<std::string> data_path;
  DataFormat format = DataFormat::kLibsvm;
  SyntheticSpec synthetic;
  RegKind reg = RegKind::kL1;
  double eta = 100.0;
  LambdaRule lambda;
  std::vector<std::string> methods;
  bool exact = false;
  std::vector<std::uint64_t> seeds{0};
  std::string out;
  std::vector<Index> n_grid;
  double d_ratio = 0.1;
  std::vector<double> lambda_coefs;
  std::vector<int> lissa_k;
  std::vector<int> lissa_m;
  /// Folds for subsampled CV; 0 means 41 per 500 points.
  Index subsample_k = 0;
  Index test_n = 10000;
  double alpha = 0.5;
  double c_x = 1.0;
  double c_eps = 1.0;
  double big_c = 1.0;
  bool timings = true;
  SolverConfig solver;

  Family family() const { return synthetic.family; }
};

/// Defaults reproducing each experiment's reference setup.
ExperimentConfig default_config(const std::string& experiment);

/// Throws invalid-argument on an unusable configuration.
void validate(const ExperimentConfig& cfg);

/// Loads the configured dataset, or generates one for `seed`.
SyntheticProblem load_or_generate(const ExperimentConfig& cfg, std::uint64_t seed);

struct MethodOutcome {
  std::string method;
  std::optional<double> aloo;
  std::optional<double> percent_error;
  double wall_time = 0.0;
  std::vector<std::size_t> support_sizes;
  /// Error kind and message when the method failed.
  std::string error;
};

struct CvOutcome {
  FitResult fit;
  double fit_time = 0.0;
  std::optional<double> loo;
  std::string loo_reason = "not-computed";
  double exact_time = 0.0;
  std::vector<std::size_t> exact_support_sizes;
  std::vector<MethodOutcome> methods;
};

struct CvOptions {
  std::vector<std::string> methods;
  bool exact = false;
  double eta = 100.0;
  Index subsample_k = 0;
  std::uint64_t seed = 0;
  LissaConfig lissa;
  SolverConfig solver;
};

/// Fits the model, optionally runs exact LOO, and evaluates every requested
/// method: exact, ij_full, ns_full, ij_restricted, ns_restricted, ij_lissa,
/// smoothed_ij, smoothed_ns, subsample. Method failures are captured.
CvOutcome run_cv_methods(const Dataset& data, const Regularizer& reg, const CvOptions& opts);

/// Subsample budget matched to 41 folds per 500 points, at least 1.
Index matched_subsample_k(Index n);

struct ScalingCell {
  std::string arm;  // "fixed-d" or "proportional-d"
  Index n = 0;
  Index d = 0;
  std::uint64_t seed = 0;
  CvOutcome cv;
};

struct ScalingResult {
  std::vector<ScalingCell> cells;
  /// Median percent error per (arm, method) along n_grid.
  std::vector<double> median_fixed_ij, median_fixed_ns, median_prop_ij, median_prop_ns;
  /// Least-squares slope of log median error against log N.
  std::optional<double> slope_fixed_ij, slope_fixed_ns;
};

ScalingResult run_scaling(const ExperimentConfig& cfg);

struct SparseSimCell {
  std::uint64_t seed = 0;
  CvOutcome cv;
};

struct SparseSimResult {
  std::vector<SparseSimCell> cells;
  /// method -> median percent error / median wall time over seeds.
  std::vector<std::pair<std::string, std::optional<double>>> median_error;
  std::vector<std::pair<std::string, std::optional<double>>> median_time;
  std::optional<double> median_exact_time;
};

SparseSimResult run_sparse_sim(const ExperimentConfig& cfg);

struct SupportSweepCell {
  double coef = 0.0;
  Index n = 0;
  Index d = 0;
  std::uint64_t seed = 0;
  std::size_t full_support = 0;
  std::size_t min_fold_support = 0;
  std::size_t max_fold_support = 0;
  double mean_fold_support = 0.0;
  CvOutcome cv;
};

struct SupportSweepResult {
  std::vector<SupportSweepCell> cells;
};

SupportSweepResult run_support_sweep(const ExperimentConfig& cfg);

struct LissaCell {
  int k = 0;
  int m = 0;
  std::optional<double> rel_error;
  double wall_time = 0.0;
  std::string error;
};

struct LissaFrontierResult {
  double scale = 0.0;
  double exact_ij_time = 0.0;
  std::vector<LissaCell> cells;
};

/// Relative error sqrt(sum_n |a_n - b_n|^2) / sqrt(sum_n |b_n - theta|^2).
double relative_loo_error(const LooSet& approx, const LooSet& reference, const Vector& theta);

LissaFrontierResult run_lissa_frontier(const ExperimentConfig& cfg);

struct LambdaSweepCell {
  double coef = 0.0;
  double lambda = 0.0;
  std::uint64_t seed = 0;
  double train_loss = 0.0;
  double test_loss = 0.0;
  std::size_t support = 0;
  CvOutcome cv;
};

struct LambdaSweepResult {
  std::vector<LambdaSweepCell> cells;
};

LambdaSweepResult run_lambda_sweep(const ExperimentConfig& cfg);

/// Runs the configured experiment. Errors inside grid cells are captured in
/// the report; configuration errors propagate.
RunReport run_experiment(const ExperimentConfig& cfg);

}  // namespace sparsecv
