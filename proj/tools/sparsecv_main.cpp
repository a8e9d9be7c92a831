#include "sparsecv/dataset_io.hpp"
#include "sparsecv/error.hpp"
#include "sparsecv/experiments.hpp"
#include "sparsecv/parallel.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <iostream>
#include <sstream>

namespace {

using namespace sparsecv;

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <typename T>
std::vector<T> parse_numbers(const std::string& s, const char* what) {
  std::vector<T> out;
  for (const std::string& item : split_list(s)) {
    try {
      std::size_t used = 0;
      double v = std::stod(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(static_cast<T>(v));
    } catch (const std::exception&) {
      throw Error(ErrorKind::kInvalidArgument, std::string("bad ") + what + " entry '" + item + "'");
    }
  }
  return out;
}

// Accepts "0,1,2" or a range "0-9".
std::vector<std::uint64_t> parse_seeds(const std::string& s) {
  const auto dash = s.find('-');
  if (dash != std::string::npos && s.find(',') == std::string::npos && dash > 0) {
    const auto lo = parse_numbers<std::uint64_t>(s.substr(0, dash), "seed");
    const auto hi = parse_numbers<std::uint64_t>(s.substr(dash + 1), "seed");
    if (lo.size() != 1 || hi.size() != 1 || hi[0] < lo[0]) {
      throw Error(ErrorKind::kInvalidArgument, "bad seed range '" + s + "'");
    }
    std::vector<std::uint64_t> out;
    for (std::uint64_t v = lo[0]; v <= hi[0]; ++v) out.push_back(v);
    return out;
  }
  return parse_numbers<std::uint64_t>(s, "seed");
}

int fail(const std::string& kind, const std::string& message) {
  const nlohmann::json block = {{"error", {{"kind", kind}, {"message", message}}}};
  std::cerr << block.dump(2) << '\n';
  return 2;
}

struct Flags {
  std::string data;
  std::string format = "libsvm";
  std::string family;
  std::string reg;
  std::optional<double> lambda;
  std::optional<double> lambda_coef;
  std::optional<double> eta;
  std::string methods;
  bool exact = false;
  bool no_exact = false;
  std::string seeds;
  std::string out;
  unsigned threads = 0;
  std::optional<long long> n;
  std::optional<long long> d;
  std::optional<long long> deff;
  std::string theta_mode;
  std::optional<double> noise;
  std::string n_grid;
  std::optional<double> d_ratio;
  std::string lambda_coefs;
  std::string lissa_k;
  std::string lissa_m;
  std::optional<long long> subsample_k;
  std::optional<long long> test_n;
  std::optional<double> alpha;
  std::optional<double> c_x;
  std::optional<double> c_eps;
  std::optional<double> big_c;
  std::optional<double> tol;
  std::optional<double> kkt_tol;
  bool standardize = false;
  bool no_timings = false;
};

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--data", f.data, "Dataset path (synthetic data when omitted)");
  sub->add_option("--format", f.format, "Dataset format")->check(CLI::IsMember({"libsvm", "csv"}));
  sub->add_option("--family", f.family, "GLM family")->check(CLI::IsMember({"linear", "logistic"}));
  sub->add_option("--reg", f.reg, "Regularizer")
      ->check(CLI::IsMember({"l1", "l2", "smoothed-l1"}));
  auto* lam = sub->add_option("--lambda", f.lambda, "Absolute regularization strength");
  auto* coef = sub->add_option("--lambda-coef", f.lambda_coef, "c in lambda = c*sqrt(log D / N)");
  lam->excludes(coef);
  sub->add_option("--eta", f.eta, "Smoothing parameter for smoothed-l1");
  sub->add_option("--methods", f.methods, "Comma list of methods");
  auto* ex = sub->add_flag("--exact", f.exact, "Run exact LOOCV");
  auto* nex = sub->add_flag("--no-exact", f.no_exact, "Skip exact LOOCV");
  ex->excludes(nex);
  sub->add_option("--seeds", f.seeds, "Comma list or range a-b");
  sub->add_option("--out", f.out, "Report path (JSON; CSV written alongside)");
  sub->add_option("--threads", f.threads, "Worker threads (0 = all cores)");
  sub->add_option("--n", f.n, "Synthetic N");
  sub->add_option("--d", f.d, "Synthetic D");
  sub->add_option("--deff", f.deff, "Nonzeros in the true parameter");
  sub->add_option("--theta", f.theta_mode, "True parameter entries")
      ->check(CLI::IsMember({"unit", "gaussian"}));
  sub->add_option("--noise", f.noise, "Noise sigma for linear responses");
  sub->add_option("--n-grid", f.n_grid, "Comma list of N values");
  sub->add_option("--d-ratio", f.d_ratio, "D/N for proportional arms");
  sub->add_option("--lambda-coefs", f.lambda_coefs, "Comma list of lambda coefficients");
  sub->add_option("--lissa-k", f.lissa_k, "Comma list of LiSSA depths");
  sub->add_option("--lissa-m", f.lissa_m, "Comma list of LiSSA repeats");
  sub->add_option("--subsample-k", f.subsample_k, "Folds for subsampled CV");
  sub->add_option("--test-n", f.test_n, "Held-out points for lambda-sweep");
  sub->add_option("--alpha", f.alpha);
  sub->add_option("--c-x", f.c_x);
  sub->add_option("--c-eps", f.c_eps);
  sub->add_option("--big-c", f.big_c);
  sub->add_option("--tol", f.tol, "Solver tolerance");
  sub->add_option("--kkt-tol", f.kkt_tol, "KKT / gradient tolerance");
  sub->add_flag("--standardize", f.standardize, "Standardize columns inside the l1 solver");
  sub->add_flag("--no-timings", f.no_timings, "Null out wall times for reproducible output");
}

ExperimentConfig build_config(const std::string& name, const Flags& f) {
  ExperimentConfig c = default_config(name);
  if (!f.data.empty()) c.data_path = f.data;
  c.format = data_format_from_string(f.format);
  if (!f.family.empty()) c.synthetic.family = f.family == "linear" ? Family::kLinear : Family::kLogistic;
  if (!f.reg.empty()) {
    c.reg = f.reg == "l1" ? RegKind::kL1 : f.reg == "l2" ? RegKind::kL2 : RegKind::kSmoothedL1;
  }
  if (f.lambda) c.lambda = {true, *f.lambda};
  if (f.lambda_coef) c.lambda = {false, *f.lambda_coef};
  if (f.eta) c.eta = *f.eta;
  if (!f.methods.empty()) c.methods = split_list(f.methods);
  if (f.exact) c.exact = true;
  if (f.no_exact) c.exact = false;
  if (!f.seeds.empty()) c.seeds = parse_seeds(f.seeds);
  c.out = f.out;
  if (f.n) c.synthetic.n = *f.n;
  if (f.d) c.synthetic.d = *f.d;
  if (f.deff) c.synthetic.deff = *f.deff;
  if (!f.theta_mode.empty()) c.synthetic.theta_mode = theta_mode_from_string(f.theta_mode);
  if (f.noise) c.synthetic.noise_sigma = *f.noise;
  if (!f.n_grid.empty()) c.n_grid = parse_numbers<Index>(f.n_grid, "n-grid");
  if (f.d_ratio) c.d_ratio = *f.d_ratio;
  if (!f.lambda_coefs.empty()) c.lambda_coefs = parse_numbers<double>(f.lambda_coefs, "lambda-coefs");
  if (!f.lissa_k.empty()) c.lissa_k = parse_numbers<int>(f.lissa_k, "lissa-k");
  if (!f.lissa_m.empty()) c.lissa_m = parse_numbers<int>(f.lissa_m, "lissa-m");
  if (f.subsample_k) c.subsample_k = *f.subsample_k;
  if (f.test_n) c.test_n = *f.test_n;
  if (f.alpha) c.alpha = *f.alpha;
  if (f.c_x) c.c_x = *f.c_x;
  if (f.c_eps) c.c_eps = *f.c_eps;
  if (f.big_c) c.big_c = *f.big_c;
  if (f.tol) c.solver.tol = *f.tol;
  if (f.kkt_tol) c.solver.kkt_tol = *f.kkt_tol;
  if (f.standardize) c.solver.standardize = true;
  if (f.no_timings) c.timings = false;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Approximate leave-one-out cross-validation for sparse GLMs"};
  app.require_subcommand(1);
  Flags flags;
  const std::vector<std::pair<std::string, std::string>> experiments = {
      {"fit", "Fit one model and report the estimate and support"},
      {"cv", "Exact and approximate LOOCV on one dataset"},
      {"scaling", "Approximation error against N, fixed and proportional D"},
      {"sparse-sim", "High-dimensional comparison against the baselines"},
      {"support-sweep", "Fold support sizes against N for several lambdas"},
      {"lambda-sweep", "Train, test and ALOO losses along a lambda grid"},
      {"lissa-frontier", "Stochastic inverse-Hessian accuracy over (K, M)"},
      {"audit", "Check the support-stability assumptions on data"}};
  for (const auto& [name, help] : experiments) add_common(app.add_subcommand(name, help), flags);

  auto* pre = app.add_subcommand("preprocess-rcv1", "Subset an RCV1 LIBSVM file");
  std::string pre_in, pre_out;
  long long pre_docs = 5000, pre_features = 10000;
  std::uint64_t pre_seed = 0;
  pre->add_option("--data", pre_in, "Input LIBSVM file")->required();
  pre->add_option("--out", pre_out, "Output LIBSVM file")->required();
  pre->add_option("--docs", pre_docs, "Documents to sample");
  pre->add_option("--features", pre_features, "Most frequent features to keep");
  pre->add_option("--seed", pre_seed, "Sampling seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("invalid-argument", e.what());
  }

  try {
    set_thread_count(flags.threads);
    if (pre->parsed()) {
      const Dataset d = preprocess_rcv1(pre_in, pre_out, pre_docs, pre_features, pre_seed);
      std::cout << "wrote " << pre_out << " (" << d.n() << " x " << d.d() << ")\n";
      return 0;
    }
    const std::string name = app.get_subcommands().front()->get_name();
    const ExperimentConfig cfg = build_config(name, flags);
    const RunReport report = run_experiment(cfg);
    if (!cfg.out.empty()) {
      emit_report(report, cfg.out);
      std::cerr << "wrote " << cfg.out << " and " << csv_path_for(cfg.out) << '\n';
    } else {
      std::cout << report.body.dump(2) << '\n';
    }
    const auto& errors = report.body["errors"];
    if (!errors.empty() && report.body["results"].empty()) {
      return fail(errors[0]["kind"].get<std::string>(), errors[0]["message"].get<std::string>());
    }
    if (!errors.empty()) {
      std::cerr << errors.size() << " grid cell(s) failed; see \"errors\"\n";
    }
    return 0;
  } catch (const Error& e) {
    return fail(std::string(to_string(e.kind())), e.what());
  } catch (const std::exception& e) {
    return fail("internal", e.what());
  }
}
