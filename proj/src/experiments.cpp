#include "sparsecv/experiments.hpp"

#include "sparsecv/approx_cv.hpp"
#include "sparsecv/audit.hpp"
#include "sparsecv/error.hpp"
#include "sparsecv/smooth_solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>

namespace sparsecv {

using nlohmann::json;

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string describe(const Error& e) { return std::string(to_string(e.kind())) + ": " + e.what(); }

Regularizer make_reg(RegKind kind, double lambda, double eta) {
  switch (kind) {
    case RegKind::kL1: return Regularizer::l1(lambda);
    case RegKind::kL2: return Regularizer::l2(lambda);
    case RegKind::kSmoothedL1: return Regularizer::smoothed_l1(lambda, eta);
  }
  return Regularizer::l1(lambda);
}

std::vector<std::uint64_t> seed_range(std::uint64_t count) {
  std::vector<std::uint64_t> s;
  for (std::uint64_t i = 0; i < count; ++i) s.push_back(i);
  return s;
}

std::string seed_text(std::uint64_t seed) { return std::to_string(seed); }

Index scaled_d(Index n, double ratio) {
  return std::max<Index>(1, static_cast<Index>(std::llround(static_cast<double>(n) * ratio)));
}

std::optional<double> slope_of(const std::vector<Index>& ns, const std::vector<double>& ys) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < ns.size() && i < ys.size(); ++i) {
    if (std::isfinite(ys[i]) && ys[i] > 0.0) {
      lx.push_back(std::log(static_cast<double>(ns[i])));
      ly.push_back(std::log(ys[i]));
    }
  }
  if (lx.size() < 2) return std::nullopt;
  const double k = static_cast<double>(lx.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i] / k;
    my += ly[i] / k;
  }
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  if (sxx == 0.0) return std::nullopt;
  return sxy / sxx;
}

double nan_or(const std::optional<double>& v) {
  return v ? *v : std::numeric_limits<double>::quiet_NaN();
}

// ---- report helpers -------------------------------------------------------

json fit_json(const FitResult& fit) {
  json j;
  put_number(j, "objective", fit.objective_value);
  j["iterations"] = fit.iterations;
  j["converged"] = fit.converged;
  put_number(j, "kkt_violation", fit.kkt_violation);
  j["support_size"] = fit.support.size();
  j["notes"] = fit.notes;
  return j;
}

json cv_json(const RunReport& report, const CvOutcome& cv) {
  json j;
  j["fit"] = fit_json(cv.fit);
  put_timing(report, j, "fit_time_seconds", cv.fit_time);
  put_number(j, "loo", cv.loo, cv.loo_reason);
  if (cv.loo) {
    put_timing(report, j, "exact_time_seconds", cv.exact_time);
  } else {
    put_number(j, "exact_time_seconds", std::nullopt, cv.loo_reason);
  }
  j["exact_support_sizes"] = cv.exact_support_sizes;
  json methods = json::object();
  for (const MethodOutcome& m : cv.methods) {
    json mj;
    put_number(mj, "aloo", m.aloo, m.error.empty() ? "not-computed" : m.error);
    put_number(mj, "percent_error", m.percent_error,
               !m.error.empty() ? m.error : (cv.loo ? "not-computed" : cv.loo_reason));
    put_timing(report, mj, "wall_time_seconds", m.wall_time);
    mj["support_sizes"] = m.support_sizes;
    if (!m.error.empty()) mj["error"] = m.error;
    methods[m.method] = mj;
  }
  j["methods"] = methods;
  return j;
}

void cv_rows(RunReport& report, const CvOutcome& cv, Index n, Index d, const std::string& seed) {
  auto timing = [&](double t) -> std::optional<double> {
    return report.include_timings ? std::optional<double>(t) : std::nullopt;
  };
  report.rows.push_back({"exact", n, d, "loo", cv.loo, seed});
  if (cv.loo) report.rows.push_back({"exact", n, d, "wall_time", timing(cv.exact_time), seed});
  for (const MethodOutcome& m : cv.methods) {
    report.rows.push_back({m.method, n, d, "aloo", m.aloo, seed});
    report.rows.push_back({m.method, n, d, "percent_error", m.percent_error, seed});
    report.rows.push_back({m.method, n, d, "wall_time", timing(m.wall_time), seed});
  }
}

json config_json(const ExperimentConfig& cfg) {
  json j;
  j["experiment"] = cfg.experiment;
  if (cfg.data_path) {
    j["data"] = *cfg.data_path;
    j["format"] = to_string(cfg.format);
  } else {
    j["synthetic"] = {{"n", cfg.synthetic.n},
                      {"d", cfg.synthetic.d},
                      {"deff", cfg.synthetic.deff},
                      {"theta_mode", cfg.synthetic.theta_mode == ThetaMode::kUnit ? "unit" : "gaussian"},
                      {"noise_sigma", cfg.synthetic.noise_sigma}};
  }
  j["family"] = to_string(cfg.family());
  j["reg"] = to_string(cfg.reg);
  j["eta"] = cfg.eta;
  j["lambda_rule"] = {{"kind", cfg.lambda.absolute ? "absolute" : "coefficient"},
                      {"value", cfg.lambda.value}};
  j["methods"] = cfg.methods;
  j["exact"] = cfg.exact;
  j["seeds"] = cfg.seeds;
  j["n_grid"] = cfg.n_grid;
  j["d_ratio"] = cfg.d_ratio;
  j["lambda_coefs"] = cfg.lambda_coefs;
  j["lissa_k"] = cfg.lissa_k;
  j["lissa_m"] = cfg.lissa_m;
  j["subsample_k"] = cfg.subsample_k;
  j["test_n"] = cfg.test_n;
  j["alpha"] = cfg.alpha;
  j["c_x"] = cfg.c_x;
  j["c_eps"] = cfg.c_eps;
  j["big_c"] = cfg.big_c;
  j["solver"] = {{"tol", cfg.solver.tol},
                 {"kkt_tol", cfg.solver.kkt_tol},
                 {"max_iters", cfg.solver.max_iters},
                 {"standardize", cfg.solver.standardize}};
  return j;
}

CvOptions cv_options(const ExperimentConfig& cfg, std::uint64_t seed) {
  CvOptions o;
  o.methods = cfg.methods;
  o.exact = cfg.exact;
  o.eta = cfg.eta;
  o.subsample_k = cfg.subsample_k;
  o.seed = derive_seed(seed, {std::string("subsample")});
  o.solver = cfg.solver;
  o.lissa.seed = derive_seed(seed, {std::string("lissa")});
  if (!cfg.lissa_k.empty()) o.lissa.depth_k = cfg.lissa_k.front();
  if (!cfg.lissa_m.empty()) o.lissa.repeats_m = cfg.lissa_m.front();
  return o;
}

}  // namespace

double LambdaRule::resolve(Index n, Index d) const {
  if (absolute) return value;
  return value * std::sqrt(std::log(static_cast<double>(d)) / static_cast<double>(n));
}

Index matched_subsample_k(Index n) {
  return std::clamp<Index>(static_cast<Index>(std::llround(41.0 * static_cast<double>(n) / 500.0)),
                           1, n);
}

ExperimentConfig default_config(const std::string& experiment) {
  ExperimentConfig c;
  c.experiment = experiment;
  c.synthetic.noise_sigma = 1.0;
  if (experiment == "fit" || experiment == "cv") {
    c.synthetic = {200, 1000, 5, Family::kLogistic, ThetaMode::kUnit, 1.0};
    c.reg = RegKind::kL1;
    c.lambda = {false, 0.6};
    c.methods = {"ij_restricted", "ns_restricted"};
  } else if (experiment == "scaling") {
    c.synthetic = {500, 5, 2, Family::kLogistic, ThetaMode::kUnit, 1.0};
    c.reg = RegKind::kL2;
    c.lambda = {true, 0.01};
    c.methods = {"ij_full", "ns_full"};
    c.exact = true;
    c.n_grid = {500, 1000, 2000, 4000};
    c.seeds = seed_range(5);
    c.solver.kkt_tol = 1e-12;
  } else if (experiment == "sparse-sim") {
    c.synthetic = {500, 40000, 5, Family::kLogistic, ThetaMode::kUnit, 1.0};
    c.reg = RegKind::kL1;
    c.lambda = {false, 0.6};
    c.methods = {"ij_restricted", "ns_restricted", "subsample", "smoothed_ij"};
    c.seeds = seed_range(25);
  } else if (experiment == "support-sweep") {
    c.synthetic = {1000, 100, 5, Family::kLinear, ThetaMode::kUnit, 1.0};
    c.reg = RegKind::kL1;
    c.methods = {"ij_restricted"};
    c.exact = true;
    c.n_grid = {1000, 2000, 4000};
    c.lambda_coefs = {10.0, 1.0};
    c.seeds = seed_range(5);
  } else if (experiment == "lambda-sweep") {
    c.synthetic = {300, 75, 5, Family::kLogistic, ThetaMode::kGaussian, 1.0};
    c.reg = RegKind::kL1;
    c.methods = {"ij_restricted", "ns_restricted"};
    c.exact = true;
    c.lambda_coefs = {0.1, 0.2, 0.3, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0};
  } else if (experiment == "lissa-frontier") {
    c.synthetic = {500, 100, 5, Family::kLogistic, ThetaMode::kUnit, 1.0};
    c.reg = RegKind::kL2;
    c.lambda = {true, 1.0};
    c.lissa_k = {1, 20, 30, 50, 60, 80, 100, 120};
    c.lissa_m = {2, 25};
  } else if (experiment == "audit") {
    c.synthetic = {1000, 100, 5, Family::kLinear, ThetaMode::kUnit, 1.0};
    c.reg = RegKind::kL1;
    c.lambda = {false, 10.0};
  } else {
    throw Error(ErrorKind::kInvalidArgument, "unknown experiment: " + experiment);
  }
  return c;
}

void validate(const ExperimentConfig& cfg) {
  static const std::vector<std::string> kExperiments = {
      "fit", "cv", "scaling", "sparse-sim", "support-sweep", "lambda-sweep", "lissa-frontier",
      "audit"};
  if (std::find(kExperiments.begin(), kExperiments.end(), cfg.experiment) == kExperiments.end()) {
    throw Error(ErrorKind::kInvalidArgument, "unknown experiment: " + cfg.experiment);
  }
  if (cfg.seeds.empty()) throw Error(ErrorKind::kInvalidArgument, "seeds must be nonempty");
  if (!(cfg.lambda.value > 0.0) && !(cfg.lambda.absolute && cfg.lambda.value == 0.0)) {
    throw Error(ErrorKind::kInvalidArgument, "lambda coefficient must be > 0");
  }
  for (double c : cfg.lambda_coefs) {
    if (!(c > 0.0)) throw Error(ErrorKind::kInvalidArgument, "lambda coefficients must be > 0");
  }
  if (!(cfg.eta > 0.0)) throw Error(ErrorKind::kInvalidArgument, "eta must be > 0");
  for (const std::string& m : cfg.methods) {
    if (m != "subsample") loo_method_from_string(m);
  }
}

SyntheticProblem load_or_generate(const ExperimentConfig& cfg, std::uint64_t seed) {
  if (cfg.data_path) {
    Dataset data = load_dataset(*cfg.data_path, cfg.format, cfg.family());
    return {std::move(data), Vector()};
  }
  return make_synthetic(cfg.synthetic, seed);
}

CvOutcome run_cv_methods(const Dataset& data, const Regularizer& reg, const CvOptions& opts) {
  CvOutcome out;
  auto start = std::chrono::steady_clock::now();
  SolverConfig full_cfg = opts.solver;
  full_cfg.warm_start.reset();
  out.fit = fit_model(data, reg, full_cfg);
  out.fit_time = seconds_since(start);

  if (opts.exact) {
    try {
      const ExactLoo ex = exact_loocv(data, reg, opts.solver, out.fit);
      out.exact_time = ex.set.wall_time;
      for (Index n = 0; n < ex.set.n(); ++n) {
        out.exact_support_sizes.push_back(support_of(ex.set.theta(n)).size());
      }
      out.loo = ex.loo;
      if (!ex.loo) {
        out.loo_reason = "exact-loo-incomplete";
        if (!ex.set.failures.empty()) out.loo_reason += ": " + ex.set.failures.front();
      }
    } catch (const Error& e) {
      out.loo_reason = describe(e);
    }
  }

  for (const std::string& name : opts.methods) {
    MethodOutcome mo;
    mo.method = name;
    try {
      if (name == "exact") {
        if (!out.loo) throw Error(ErrorKind::kIncompleteLooSet, out.loo_reason);
        mo.aloo = out.loo;
        mo.wall_time = out.exact_time;
        mo.support_sizes = out.exact_support_sizes;
        mo.percent_error = 0.0;
        out.methods.push_back(mo);
        continue;
      }
      if (name == "subsample") {
        const Index k = opts.subsample_k > 0 ? opts.subsample_k : matched_subsample_k(data.n());
        const SubsampledCv sc = subsampled_cv(data, reg, k, opts.seed, opts.solver, out.fit);
        mo.aloo = sc.estimate;
        mo.wall_time = sc.wall_time;
      } else {
        const LooMethod method = loo_method_from_string(name);
        LooSet set;
        double extra_time = 0.0;
        switch (method) {
          case LooMethod::kIjFull: set = ij_full(data, reg, out.fit); break;
          case LooMethod::kNsFull: set = ns_full(data, reg, out.fit); break;
          case LooMethod::kIjRestricted:
          case LooMethod::kNsRestricted:
            if (reg.kind != RegKind::kL1) {
              throw Error(ErrorKind::kInvalidArgument, name + " needs an l1 regularizer");
            }
            set = method == LooMethod::kIjRestricted ? ij_restricted(data, reg.lambda, out.fit)
                                                     : ns_restricted(data, reg.lambda, out.fit);
            break;
          case LooMethod::kIjLissa: set = ij_full_lissa(data, reg, out.fit, opts.lissa); break;
          case LooMethod::kSmoothedIj:
          case LooMethod::kSmoothedNs: {
            Regularizer smooth = reg;
            FitResult sfit = out.fit;
            if (reg.kind == RegKind::kL1) {
              smooth = Regularizer::smoothed_l1(reg.lambda, opts.eta);
              const auto t0 = std::chrono::steady_clock::now();
              SolverConfig scfg = opts.solver;
              scfg.warm_start = out.fit.theta;
              sfit = fit_smooth(data, smooth, scfg);
              extra_time = seconds_since(t0);
              if (!sfit.converged) {
                throw Error(ErrorKind::kNoConvergence, "smoothed fit did not converge");
              }
            }
            set = method == LooMethod::kSmoothedIj ? ij_full(data, smooth, sfit)
                                                   : ns_full(data, smooth, sfit);
            break;
          }
          case LooMethod::kExact: break;
        }
        mo.aloo = aloo_estimate(data, set);
        mo.wall_time = set.wall_time + extra_time;
        for (Index n = 0; n < set.n(); ++n) mo.support_sizes.push_back(support_of(set.theta(n)).size());
      }
      if (out.loo && mo.aloo) mo.percent_error = percent_error(*mo.aloo, *out.loo);
    } catch (const Error& e) {
      mo.error = describe(e);
    }
    out.methods.push_back(std::move(mo));
  }
  return out;
}

namespace {

std::optional<double> method_error(const CvOutcome& cv, const std::string& name) {
  for (const MethodOutcome& m : cv.methods) {
    if (m.method == name) return m.percent_error;
  }
  return std::nullopt;
}

std::optional<double> method_time(const CvOutcome& cv, const std::string& name) {
  for (const MethodOutcome& m : cv.methods) {
    if (m.method == name && m.error.empty()) return m.wall_time;
  }
  return std::nullopt;
}

}  // namespace

ScalingResult run_scaling(const ExperimentConfig& cfg) {
  ScalingResult res;
  for (const std::string arm : {"fixed-d", "proportional-d"}) {
    for (Index n : cfg.n_grid) {
      const Index d = arm == std::string("fixed-d") ? cfg.synthetic.d : scaled_d(n, cfg.d_ratio);
      for (std::uint64_t seed : cfg.seeds) {
        SyntheticSpec spec = cfg.synthetic;
        spec.n = n;
        spec.d = d;
        const SyntheticProblem p =
            make_synthetic(spec, derive_seed(seed, {std::string("scaling")}));
        const Regularizer reg = make_reg(cfg.reg, cfg.lambda.resolve(n, d), cfg.eta);
        ScalingCell cell{arm, n, d, seed, run_cv_methods(p.data, reg, cv_options(cfg, seed))};
        res.cells.push_back(std::move(cell));
      }
    }
  }
  auto medians = [&](const std::string& arm, const std::string& method) {
    std::vector<double> out;
    for (Index n : cfg.n_grid) {
      std::vector<double> v;
      for (const ScalingCell& c : res.cells) {
        if (c.arm == arm && c.n == n) v.push_back(nan_or(method_error(c.cv, method)));
      }
      out.push_back(nan_or(median(v)));
    }
    return out;
  };
  res.median_fixed_ij = medians("fixed-d", "ij_full");
  res.median_fixed_ns = medians("fixed-d", "ns_full");
  res.median_prop_ij = medians("proportional-d", "ij_full");
  res.median_prop_ns = medians("proportional-d", "ns_full");
  res.slope_fixed_ij = slope_of(cfg.n_grid, res.median_fixed_ij);
  res.slope_fixed_ns = slope_of(cfg.n_grid, res.median_fixed_ns);
  return res;
}

SparseSimResult run_sparse_sim(const ExperimentConfig& cfg) {
  SparseSimResult res;
  for (std::uint64_t seed : cfg.seeds) {
    const SyntheticProblem p =
        make_synthetic(cfg.synthetic, derive_seed(seed, {std::string("sparse-sim")}));
    const Regularizer reg =
        make_reg(cfg.reg, cfg.lambda.resolve(p.data.n(), p.data.d()), cfg.eta);
    res.cells.push_back({seed, run_cv_methods(p.data, reg, cv_options(cfg, seed))});
  }
  for (const std::string& m : cfg.methods) {
    std::vector<double> errs, times;
    for (const SparseSimCell& c : res.cells) {
      errs.push_back(nan_or(method_error(c.cv, m)));
      times.push_back(nan_or(method_time(c.cv, m)));
    }
    res.median_error.emplace_back(m, median(errs));
    res.median_time.emplace_back(m, median(times));
  }
  std::vector<double> exact_times;
  for (const SparseSimCell& c : res.cells) {
    exact_times.push_back(c.cv.loo ? c.cv.exact_time : std::numeric_limits<double>::quiet_NaN());
  }
  res.median_exact_time = median(exact_times);
  return res;
}

SupportSweepResult run_support_sweep(const ExperimentConfig& cfg) {
  SupportSweepResult res;
  for (double coef : cfg.lambda_coefs) {
    for (Index n : cfg.n_grid) {
      const Index d = scaled_d(n, cfg.d_ratio);
      for (std::uint64_t seed : cfg.seeds) {
        SyntheticSpec spec = cfg.synthetic;
        spec.n = n;
        spec.d = d;
        const SyntheticProblem p =
            make_synthetic(spec, derive_seed(seed, {std::string("support-sweep")}));
        const Regularizer reg = make_reg(RegKind::kL1, LambdaRule{false, coef}.resolve(n, d), cfg.eta);
        CvOptions opts = cv_options(cfg, seed);
        opts.exact = true;
        SupportSweepCell cell;
        cell.coef = coef;
        cell.n = n;
        cell.d = d;
        cell.seed = seed;
        cell.cv = run_cv_methods(p.data, reg, opts);
        cell.full_support = cell.cv.fit.support.size();
        const auto& sizes = cell.cv.exact_support_sizes;
        if (!sizes.empty()) {
          cell.min_fold_support = *std::min_element(sizes.begin(), sizes.end());
          cell.max_fold_support = *std::max_element(sizes.begin(), sizes.end());
          double sum = 0.0;
          for (std::size_t s : sizes) sum += static_cast<double>(s);
          cell.mean_fold_support = sum / static_cast<double>(sizes.size());
        }
        res.cells.push_back(std::move(cell));
      }
    }
  }
  return res;
}

double relative_loo_error(const LooSet& approx, const LooSet& reference, const Vector& theta) {
  if (approx.n() != reference.n() || approx.d() != reference.d()) {
    throw Error(ErrorKind::kInvalidArgument, "LOO sets differ in shape");
  }
  const double num = (approx.thetas - reference.thetas).norm();
  const double den = (reference.thetas.colwise() - theta).norm();
  if (den == 0.0) throw Error(ErrorKind::kDivisionByZero, "reference steps are all zero");
  return num / den;
}

LissaFrontierResult run_lissa_frontier(const ExperimentConfig& cfg) {
  LissaFrontierResult res;
  const std::uint64_t seed = cfg.seeds.front();
  const SyntheticProblem p = make_synthetic(cfg.synthetic, derive_seed(seed, {std::string("lissa")}));
  const Regularizer reg = make_reg(cfg.reg, cfg.lambda.resolve(p.data.n(), p.data.d()), cfg.eta);
  SolverConfig scfg = cfg.solver;
  scfg.warm_start.reset();
  const FitResult fit = fit_model(p.data, reg, scfg);
  const LooSet exact = ij_full(p.data, reg, fit);
  res.exact_ij_time = exact.wall_time;
  res.scale = lissa_default_scale(p.data, reg, fit.theta);
  for (int m : cfg.lissa_m) {
    for (int k : cfg.lissa_k) {
      LissaCell cell;
      cell.k = k;
      cell.m = m;
      LissaConfig lc;
      lc.depth_k = k;
      lc.repeats_m = m;
      lc.scale = res.scale;
      lc.seed = derive_seed(seed, {std::string("lissa"), static_cast<long long>(k),
                                   static_cast<long long>(m)});
      try {
        const LooSet approx = ij_full_lissa(p.data, reg, fit, lc);
        cell.wall_time = approx.wall_time;
        cell.rel_error = relative_loo_error(approx, exact, fit.theta);
      } catch (const Error& e) {
        cell.error = describe(e);
      }
      res.cells.push_back(cell);
    }
  }
  return res;
}

LambdaSweepResult run_lambda_sweep(const ExperimentConfig& cfg) {
  LambdaSweepResult res;
  for (std::uint64_t seed : cfg.seeds) {
    const std::uint64_t data_seed = derive_seed(seed, {std::string("lambda-sweep")});
    const SyntheticProblem p = load_or_generate(cfg, data_seed);
    std::optional<Dataset> test;
    if (!cfg.data_path && cfg.test_n > 0) {
      const std::uint64_t test_seed = derive_seed(data_seed, {std::string("test")});
      Matrix xt = gen_design(cfg.test_n, p.data.d(), test_seed);
      Vector yt = gen_responses(xt, p.theta_star, p.data.family(), cfg.synthetic.noise_sigma,
                                test_seed);
      test.emplace(Design(std::move(xt)), std::move(yt), p.data.family());
    }
    for (double coef : cfg.lambda_coefs) {
      LambdaSweepCell cell;
      cell.coef = coef;
      cell.lambda = LambdaRule{cfg.lambda.absolute, coef}.resolve(p.data.n(), p.data.d());
      cell.seed = seed;
      const Regularizer reg = make_reg(cfg.reg, cell.lambda, cfg.eta);
      cell.cv = run_cv_methods(p.data, reg, cv_options(cfg, seed));
      cell.support = cell.cv.fit.support.size();
      cell.train_loss = objective_value(p.data, Regularizer::l2(0.0), cell.cv.fit.theta);
      cell.test_loss = test ? objective_value(*test, Regularizer::l2(0.0), cell.cv.fit.theta)
                            : std::numeric_limits<double>::quiet_NaN();
      res.cells.push_back(std::move(cell));
    }
  }
  return res;
}

RunReport run_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  RunReport report;
  report.include_timings = cfg.timings;
  json& body = report.body;
  body["config"] = config_json(cfg);
  body["experiment"] = cfg.experiment;
  body["errors"] = json::array();
  json results = json::array();
  const std::string& ex = cfg.experiment;

  auto capture = [&](const std::string& where, auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      body["errors"].push_back({{"where", where}, {"kind", to_string(e.kind())}, {"message", e.what()}});
    }
  };

  if (ex == "fit" || ex == "cv") {
    for (std::uint64_t seed : cfg.seeds) {
      capture("seed " + seed_text(seed), [&] {
        const SyntheticProblem p = load_or_generate(cfg, seed);
        const Regularizer reg =
            make_reg(cfg.reg, cfg.lambda.resolve(p.data.n(), p.data.d()), cfg.eta);
        json cell;
        cell["seed"] = seed;
        cell["n"] = p.data.n();
        cell["d"] = p.data.d();
        cell["lambda"] = reg.lambda;
        if (ex == "fit") {
          const auto t0 = std::chrono::steady_clock::now();
          SolverConfig scfg = cfg.solver;
          const FitResult fit = fit_model(p.data, reg, scfg);
          const double t = seconds_since(t0);
          cell["fit"] = fit_json(fit);
          put_timing(report, cell, "fit_time_seconds", t);
          std::vector<Index> support(fit.support.begin(), fit.support.end());
          cell["support"] = support;
          report.rows.push_back({"fit", p.data.n(), p.data.d(), "objective", fit.objective_value,
                                 seed_text(seed)});
          report.rows.push_back({"fit", p.data.n(), p.data.d(), "support_size",
                                 static_cast<double>(fit.support.size()), seed_text(seed)});
        } else {
          const CvOutcome cv = run_cv_methods(p.data, reg, cv_options(cfg, seed));
          cell["cv"] = cv_json(report, cv);
          cv_rows(report, cv, p.data.n(), p.data.d(), seed_text(seed));
        }
        results.push_back(cell);
      });
    }
  } else if (ex == "scaling") {
    capture("scaling", [&] {
      const ScalingResult r = run_scaling(cfg);
      for (const ScalingCell& c : r.cells) {
        results.push_back({{"arm", c.arm}, {"n", c.n}, {"d", c.d}, {"seed", c.seed},
                           {"cv", cv_json(report, c.cv)}});
        cv_rows(report, c.cv, c.n, c.d, seed_text(c.seed));
      }
      json agg;
      auto add = [&](const std::string& key, const std::string& method, bool fixed,
                     const std::vector<double>& v) {
        json arr = json::array();
        for (std::size_t i = 0; i < v.size(); ++i) {
          json e;
          e["n"] = cfg.n_grid[i];
          put_number(e, "median_percent_error", std::isfinite(v[i]) ? std::optional(v[i]) : std::nullopt);
          arr.push_back(e);
          const Index n = cfg.n_grid[i];
          report.rows.push_back({method, n, fixed ? cfg.synthetic.d : scaled_d(n, cfg.d_ratio),
                                 "percent_error",
                                 std::isfinite(v[i]) ? std::optional(v[i]) : std::nullopt,
                                 "median"});
        }
        agg[key] = arr;
      };
      add("fixed_d_ij", "ij_full/fixed-d", true, r.median_fixed_ij);
      add("fixed_d_ns", "ns_full/fixed-d", true, r.median_fixed_ns);
      add("proportional_d_ij", "ij_full/proportional-d", false, r.median_prop_ij);
      add("proportional_d_ns", "ns_full/proportional-d", false, r.median_prop_ns);
      put_number(agg, "slope_fixed_d_ij", r.slope_fixed_ij);
      put_number(agg, "slope_fixed_d_ns", r.slope_fixed_ns);
      body["aggregates"] = agg;
    });
  } else if (ex == "sparse-sim") {
    capture("sparse-sim", [&] {
      const SparseSimResult r = run_sparse_sim(cfg);
      for (const SparseSimCell& c : r.cells) {
        results.push_back({{"seed", c.seed}, {"cv", cv_json(report, c.cv)}});
        cv_rows(report, c.cv, cfg.synthetic.n, cfg.synthetic.d, seed_text(c.seed));
      }
      json agg;
      for (std::size_t i = 0; i < r.median_error.size(); ++i) {
        json m;
        put_number(m, "median_percent_error", r.median_error[i].second);
        if (report.include_timings) {
          put_number(m, "median_wall_time_seconds", r.median_time[i].second);
        } else {
          put_number(m, "median_wall_time_seconds", std::nullopt, "timing-disabled");
        }
        agg[r.median_error[i].first] = m;
        report.rows.push_back({r.median_error[i].first, cfg.synthetic.n, cfg.synthetic.d,
                               "percent_error", r.median_error[i].second, "median"});
      }
      if (report.include_timings) {
        put_number(agg, "median_exact_time_seconds", r.median_exact_time);
      } else {
        put_number(agg, "median_exact_time_seconds", std::nullopt, "timing-disabled");
      }
      body["aggregates"] = agg;
    });
  } else if (ex == "support-sweep") {
    capture("support-sweep", [&] {
      const SupportSweepResult r = run_support_sweep(cfg);
      std::map<std::pair<double, Index>, std::vector<double>> max_support;
      for (const SupportSweepCell& c : r.cells) {
        results.push_back({{"lambda_coef", c.coef},
                           {"n", c.n},
                           {"d", c.d},
                           {"seed", c.seed},
                           {"full_support", c.full_support},
                           {"min_fold_support", c.min_fold_support},
                           {"max_fold_support", c.max_fold_support},
                           {"mean_fold_support", c.mean_fold_support},
                           {"cv", cv_json(report, c.cv)}});
        const std::string tag = "coef=" + std::to_string(c.coef);
        report.rows.push_back({tag, c.n, c.d, "max_fold_support",
                               static_cast<double>(c.max_fold_support), seed_text(c.seed)});
        report.rows.push_back({tag, c.n, c.d, "mean_fold_support", c.mean_fold_support,
                               seed_text(c.seed)});
        report.rows.push_back({tag, c.n, c.d, "ij_restricted_percent_error",
                               method_error(c.cv, "ij_restricted"), seed_text(c.seed)});
        max_support[{c.coef, c.n}].push_back(static_cast<double>(c.max_fold_support));
      }
      for (const auto& [key, v] : max_support) {
        report.rows.push_back({"coef=" + std::to_string(key.first), key.second,
                               scaled_d(key.second, cfg.d_ratio), "max_fold_support", median(v),
                               "median"});
      }
    });
  } else if (ex == "lambda-sweep") {
    capture("lambda-sweep", [&] {
      const LambdaSweepResult r = run_lambda_sweep(cfg);
      for (const LambdaSweepCell& c : r.cells) {
        json cell{{"lambda_coef", c.coef}, {"lambda", c.lambda}, {"seed", c.seed},
                  {"support", c.support}, {"cv", cv_json(report, c.cv)}};
        put_number(cell, "train_loss", c.train_loss);
        put_number(cell, "test_loss", std::isfinite(c.test_loss) ? std::optional(c.test_loss)
                                                                  : std::nullopt,
                   "no-test-set");
        results.push_back(cell);
        const Index n = cfg.synthetic.n;
        const Index d = cfg.synthetic.d;
        const std::string tag = "lambda=" + std::to_string(c.lambda);
        report.rows.push_back({tag, n, d, "train_loss", c.train_loss, seed_text(c.seed)});
        report.rows.push_back({tag, n, d, "test_loss",
                               std::isfinite(c.test_loss) ? std::optional(c.test_loss) : std::nullopt,
                               seed_text(c.seed)});
        cv_rows(report, c.cv, n, d, seed_text(c.seed));
      }
    });
  } else if (ex == "lissa-frontier") {
    for (std::uint64_t seed : cfg.seeds) {
      capture("seed " + seed_text(seed), [&] {
        ExperimentConfig one = cfg;
        one.seeds = {seed};
        const LissaFrontierResult r = run_lissa_frontier(one);
        json cell;
        cell["seed"] = seed;
        cell["scale"] = r.scale;
        put_timing(report, cell, "exact_ij_time_seconds", r.exact_ij_time);
        json grid = json::array();
        for (const LissaCell& c : r.cells) {
          json g{{"k", c.k}, {"m", c.m}};
          put_number(g, "relative_error", c.rel_error, c.error.empty() ? "not-computed" : c.error);
          put_timing(report, g, "wall_time_seconds", c.wall_time);
          grid.push_back(g);
          const std::string tag = "lissa(K=" + std::to_string(c.k) + ",M=" + std::to_string(c.m) + ")";
          report.rows.push_back({tag, cfg.synthetic.n, cfg.synthetic.d, "relative_error",
                                 c.rel_error, seed_text(seed)});
          report.rows.push_back({tag, cfg.synthetic.n, cfg.synthetic.d, "wall_time",
                                 report.include_timings ? std::optional(c.wall_time) : std::nullopt,
                                 seed_text(seed)});
        }
        cell["grid"] = grid;
        results.push_back(cell);
      });
    }
  } else if (ex == "audit") {
    for (std::uint64_t seed : cfg.seeds) {
      capture("seed " + seed_text(seed), [&] {
        const SyntheticProblem p = load_or_generate(cfg, seed);
        const double lambda = cfg.lambda.resolve(p.data.n(), p.data.d());
        AuditInput in{p.data, p.theta_star, {}, lambda};
        if (p.theta_star.size() == 0) {
          in.theta_star = fit_l1(p.data, lambda, cfg.solver).theta;
          in.surrogate_truth = true;
        }
        in.s = support_of(in.theta_star);
        in.alpha = cfg.alpha;
        in.c_x = cfg.c_x;
        in.c_eps = cfg.c_eps;
        in.big_c = cfg.big_c;
        in.check_support_stability = true;
        const AuditReport a = run_audit(in, cfg.solver);
        json cell;
        cell["seed"] = seed;
        cell["lambda"] = lambda;
        auto opt_bool = [](const std::optional<bool>& b) -> json {
          return b ? json(*b) : json(nullptr);
        };
        cell["condition1_holds"] = opt_bool(a.condition1_holds);
        cell["support_sizes_by_n"] = a.support_sizes_by_n;
        put_number(cell, "incoherence_norm", a.incoherence_norm);
        put_number(cell, "max_jnd_norm", a.max_jnd_norm);
        put_number(cell, "gamma", a.gamma);
        put_number(cell, "min_eig_loo", a.min_eig_loo);
        put_number(cell, "min_eig_lower_bound", a.min_eig_lower_bound);
        put_number(cell, "l_min_over_n", a.l_min_over_n);
        put_number(cell, "max_grad_inf_loo", a.max_grad_inf_loo);
        cell["bounded_gradient_ok"] = opt_bool(a.bounded_gradient_ok);
        put_number(cell, "beta_min_margin", a.beta_min_margin);
        put_number(cell, "lssc_k", a.lssc_k);
        cell["lambda_small_ok"] = opt_bool(a.lambda_small_ok);
        put_number(cell, "lambda_threshold", a.lambda_threshold,
                   a.mj ? "alpha-exceeded" : "not-computed");
        put_number(cell, "mj", a.mj);
        cell["surrogate_truth"] = a.surrogate_truth;
        cell["notes"] = a.notes;
        results.push_back(cell);
        const std::string s = seed_text(seed);
        for (const auto& [metric, value] :
             std::vector<std::pair<std::string, std::optional<double>>>{
                 {"incoherence_norm", a.incoherence_norm},
                 {"max_jnd_norm", a.max_jnd_norm},
                 {"min_eig_loo", a.min_eig_loo},
                 {"max_grad_inf_loo", a.max_grad_inf_loo},
                 {"beta_min_margin", a.beta_min_margin},
                 {"lambda_threshold", a.lambda_threshold},
                 {"mj", a.mj}}) {
          report.rows.push_back({"audit", p.data.n(), p.data.d(), metric, value, s});
        }
      });
    }
  }
  body["results"] = results;
  return report;
}

}  // namespace sparsecv
