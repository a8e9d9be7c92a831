#include "test_util.hpp"

#include "sparsecv/dataset_io.hpp"
#include "sparsecv/error.hpp"
#include "sparsecv/experiments.hpp"

#include <doctest.h>

#include <filesystem>

using namespace sparsecv;

namespace {

ExperimentConfig small(const std::string& name) {
  ExperimentConfig c = default_config(name);
  c.timings = false;
  c.seeds = {0, 1};
  return c;
}

}  // namespace

TEST_SUITE("bench_cli") {
  TEST_CASE("lambda rules") {
    CHECK(LambdaRule{true, 0.3}.resolve(100, 1000) == 0.3);
    CHECK(LambdaRule{false, 2.0}.resolve(100, 1000) ==
          doctest::Approx(2.0 * std::sqrt(std::log(1000.0) / 100.0)));
    CHECK(matched_subsample_k(500) == 41);
    CHECK(matched_subsample_k(200) == 16);
    CHECK(matched_subsample_k(3) == 1);
  }

  TEST_CASE("validation") {
    ExperimentConfig c = default_config("cv");
    c.seeds.clear();
    CHECK_THROWS_AS(validate(c), Error);
    c = default_config("cv");
    c.lambda = {false, 0.0};
    CHECK_THROWS_AS(validate(c), Error);
    c = default_config("cv");
    c.methods = {"ij_restricted", "magic"};
    CHECK_THROWS_AS(validate(c), Error);
    CHECK_THROWS_AS(default_config("nope"), Error);
  }

  TEST_CASE("cv run is deterministic and records every method") {
    ExperimentConfig c = small("cv");
    c.synthetic.n = 60;
    c.synthetic.d = 30;
    c.lambda = {false, 0.6};
    c.exact = true;
    c.methods = {"exact", "ij_restricted", "ns_restricted", "subsample", "smoothed_ij", "ij_full"};
    const RunReport a = run_experiment(c);
    const RunReport b = run_experiment(c);
    CHECK(a.body.dump() == b.body.dump());
    CHECK(a.body["errors"].empty());
    const auto& cv = a.body["results"][0]["cv"];
    CHECK(cv["loo"].is_number());
    CHECK(cv["methods"]["ij_restricted"]["percent_error"].is_number());
    CHECK(cv["methods"]["subsample"]["aloo"].is_number());
    CHECK(cv["methods"]["smoothed_ij"]["aloo"].is_number());
    // Full-dimensional IJ on an l1 fit fails, and the failure is recorded.
    CHECK(cv["methods"]["ij_full"]["aloo"].is_null());
    CHECK(cv["methods"]["ij_full"]["error"].get<std::string>().rfind("non-differentiable", 0) == 0);
    CHECK(cv["methods"]["ij_restricted"]["wall_time_seconds"].is_null());
    CHECK(cv["methods"]["ij_restricted"]["wall_time_seconds_reason"] == "timing-disabled");
    CHECK(cv["methods"]["ij_restricted"]["support_sizes"].size() == 60);
    CHECK(cv["methods"]["exact"]["percent_error"] == 0.0);
  }

  TEST_CASE("exact LOO skipped leaves loo null with a reason") {
    ExperimentConfig c = small("cv");
    c.synthetic.n = 40;
    c.synthetic.d = 20;
    c.lambda = {false, 0.6};
    c.exact = false;
    const RunReport r = run_experiment(c);
    const auto& cv = r.body["results"][0]["cv"];
    CHECK(cv["loo"].is_null());
    CHECK(cv["loo_reason"] == "not-computed");
    CHECK(cv["methods"]["ij_restricted"]["percent_error"].is_null());
  }

  TEST_CASE("fit on a file") {
    const auto dir = std::filesystem::temp_directory_path() / "sparsecv_tests";
    std::filesystem::create_directories(dir);
    const Dataset src = testutil::synthetic(40, 6, Family::kLogistic, 2);
    write_libsvm(src, (dir / "fit.libsvm").string());
    ExperimentConfig c = small("fit");
    c.data_path = (dir / "fit.libsvm").string();
    c.lambda = {true, 0.02};
    const RunReport r = run_experiment(c);
    CHECK(r.body["errors"].empty());
    CHECK(r.body["results"][0]["n"] == 40);
    CHECK(r.body["results"][0]["fit"]["converged"] == true);
  }

  TEST_CASE("missing file is captured per seed") {
    ExperimentConfig c = small("cv");
    c.data_path = "/nonexistent/data.libsvm";
    const RunReport r = run_experiment(c);
    CHECK(r.body["errors"].size() == 2);
    CHECK(r.body["errors"][0]["kind"] == "io-error");
  }

  TEST_CASE("grid experiments run at toy scale") {
    {
      ExperimentConfig c = small("scaling");
      c.n_grid = {60, 120};
      c.synthetic.d = 3;
      const ScalingResult r = run_scaling(c);
      CHECK(r.cells.size() == 8);
      CHECK(r.median_fixed_ij.size() == 2);
      CHECK(r.slope_fixed_ij.has_value());
      CHECK(run_experiment(c).body["aggregates"].contains("slope_fixed_d_ij"));
    }
    {
      ExperimentConfig c = small("sparse-sim");
      c.synthetic.n = 50;
      c.synthetic.d = 200;
      c.exact = true;
      c.lambda = {false, 0.8};
      const SparseSimResult r = run_sparse_sim(c);
      CHECK(r.cells.size() == 2);
      CHECK(r.median_error.size() == c.methods.size());
      CHECK(r.median_exact_time.has_value());
    }
    {
      ExperimentConfig c = small("support-sweep");
      c.n_grid = {100, 200};
      const SupportSweepResult r = run_support_sweep(c);
      CHECK(r.cells.size() == 8);
      for (const auto& cell : r.cells) CHECK(cell.max_fold_support >= cell.min_fold_support);
    }
    {
      ExperimentConfig c = small("lambda-sweep");
      c.synthetic.n = 60;
      c.synthetic.d = 15;
      c.test_n = 200;
      c.lambda_coefs = {0.5, 1.0};
      const LambdaSweepResult r = run_lambda_sweep(c);
      CHECK(r.cells.size() == 4);
      for (const auto& cell : r.cells) CHECK(std::isfinite(cell.test_loss));
    }
    {
      ExperimentConfig c = small("lissa-frontier");
      c.synthetic.n = 60;
      c.synthetic.d = 5;
      c.lissa_k = {1, 50};
      c.lissa_m = {2};
      const LissaFrontierResult r = run_lissa_frontier(c);
      REQUIRE(r.cells.size() == 2);
      CHECK(r.cells[1].rel_error.value() < r.cells[0].rel_error.value());
    }
    {
      ExperimentConfig c = small("audit");
      c.synthetic.n = 200;
      c.synthetic.d = 20;
      c.synthetic.deff = 2;
      const RunReport r = run_experiment(c);
      CHECK(r.body["errors"].empty());
      CHECK(r.body["results"].size() == 2);
      CHECK(r.body["results"][0].contains("max_jnd_norm"));
    }
  }

  TEST_CASE("relative LOO error") {
    LooSet a, b;
    a.thetas = Matrix::Ones(2, 3);
    b.thetas = Matrix::Ones(2, 3) * 2.0;
    CHECK(relative_loo_error(a, b, Vector::Zero(2)) == doctest::Approx(0.5));
    CHECK_THROWS_AS(relative_loo_error(a, b, Vector::Constant(2, 2.0)), Error);
  }
}
