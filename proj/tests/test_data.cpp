#include "test_util.hpp"

#include "sparsecv/dataset_io.hpp"
#include "sparsecv/error.hpp"
#include "sparsecv/random.hpp"
#include "sparsecv/report.hpp"
#include "sparsecv/synth.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

using namespace sparsecv;

namespace {

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "sparsecv_tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::kInvalidArgument;
}

}  // namespace

TEST_SUITE("synth_data") {
  TEST_CASE("generators are deterministic and entrywise addressable") {
    const Matrix a = gen_design(30, 7, 42);
    CHECK((a - gen_design(30, 7, 42)).norm() == 0.0);
    CHECK((a - gen_design(30, 7, 43)).norm() > 0.0);
    // A larger draw contains the smaller one.
    const Matrix big = gen_design(40, 9, 42);
    CHECK((big.topLeftCorner(30, 7) - a).norm() == 0.0);
  }

  TEST_CASE("design entries look standard normal") {
    const Matrix x = gen_design(2000, 50, 3);
    const double mean = x.mean();
    const double var = (x.array() - mean).square().mean();
    CHECK(std::abs(mean) < 0.01);
    CHECK(std::abs(var - 1.0) < 0.02);
    const double third = ((x.array() - mean).cube()).mean();
    CHECK(std::abs(third) < 0.05);
  }

  TEST_CASE("true parameter modes") {
    const Vector u = gen_theta_star(10, 5, ThetaMode::kUnit, 1);
    CHECK(u.head(5) == Vector::Ones(5));
    CHECK(u.tail(5).norm() == 0.0);
    const Vector g = gen_theta_star(10, 5, ThetaMode::kGaussian, 1);
    for (Index j = 0; j < 5; ++j) CHECK(g[j] != 0.0);
    CHECK(g.tail(5).norm() == 0.0);
    CHECK_THROWS_AS(gen_theta_star(3, 4, ThetaMode::kUnit, 1), Error);
    CHECK(theta_mode_from_string("gaussian") == ThetaMode::kGaussian);
    CHECK_THROWS_AS(theta_mode_from_string("laplace"), Error);
  }

  TEST_CASE("responses") {
    const Matrix x = gen_design(4000, 3, 9);
    Vector theta(3);
    theta << 1.0, -1.0, 0.0;
    const Vector y = gen_responses(x, theta, Family::kLogistic, 1.0, 9);
    double agree = 0.0, expected = 0.0;
    for (Index i = 0; i < y.size(); ++i) {
      CHECK((y[i] == 1.0 || y[i] == -1.0));
      const double z = x.row(i).dot(theta);
      agree += (y[i] > 0) == (z > 0) ? 1.0 : 0.0;
      expected += sigmoid(std::abs(z));
    }
    CHECK(std::abs(agree - expected) < 0.03 * 4000.0);
    const Vector lin = gen_responses(x, theta, Family::kLinear, 0.0, 9);
    CHECK((lin - x * theta).norm() == 0.0);
    const Vector noisy = gen_responses(x, theta, Family::kLinear, 0.5, 9);
    const double sd = std::sqrt((noisy - x * theta).squaredNorm() / 4000.0);
    CHECK(std::abs(sd - 0.5) < 0.03);
  }

  TEST_CASE("null parameter cases") {
    CHECK(gen_theta_star(8, 0, ThetaMode::kGaussian, 3).norm() == 0.0);
    const Matrix x = gen_design(4000, 4, 2);
    const Vector y = gen_responses(x, Vector::Zero(4), Family::kLogistic, 1.0, 2);
    const double positive = (y.array() > 0.0).cast<double>().mean();
    CHECK(std::abs(positive - 0.5) < 0.03);
  }

  TEST_CASE("counter streams are independent") {
    std::set<std::uint64_t> seen;
    for (std::uint64_t s : {1ULL, 2ULL})
      for (Stream st : {Stream::kDesign, Stream::kNoise, Stream::kLissa})
        for (std::uint64_t i = 0; i < 50; ++i) seen.insert(counter_bits(s, st, i, 0));
    CHECK(seen.size() == 300);
  }
}

TEST_SUITE("dataset_io") {
  TEST_CASE("libsvm example") {
    std::istringstream in("+1 3:0.5\n-1 1:2.0\n");
    const Dataset d = parse_libsvm(in, Family::kLogistic);
    CHECK(d.n() == 2);
    CHECK(d.d() >= 3);
    CHECK(d.x().coeff(0, 2) == 0.5);
    CHECK(d.x().coeff(1, 0) == 2.0);
    CHECK(d.y()[0] == 1.0);
    CHECK(d.y()[1] == -1.0);
  }

  TEST_CASE("libsvm labels, comments and qid") {
    std::istringstream in("# header\n0 qid:3 2:1.5 # trailing\n\n1 1:1\n");
    const Dataset d = parse_libsvm(in, Family::kLogistic);
    CHECK(d.n() == 2);
    CHECK(d.y()[0] == -1.0);
    CHECK(d.y()[1] == 1.0);
    std::istringstream lin("2.5 1:1\n-0.5 2:1\n");
    CHECK(parse_libsvm(lin, Family::kLinear).y()[0] == 2.5);
  }

  TEST_CASE("libsvm errors carry line numbers") {
    std::istringstream empty("");
    CHECK(kind_of([&] { parse_libsvm(empty, Family::kLinear); }) == ErrorKind::kParseError);
    std::istringstream bad("1 1:2\n1 x:2\n");
    try {
      parse_libsvm(bad, Family::kLinear);
      FAIL("expected parse error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kParseError);
      CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
    std::istringstream zero("1 0:2\n");
    CHECK(kind_of([&] { parse_libsvm(zero, Family::kLinear); }) == ErrorKind::kParseError);
    std::istringstream label("2 1:1\n");
    CHECK(kind_of([&] { parse_libsvm(label, Family::kLogistic); }) == ErrorKind::kLabelDomain);
    std::istringstream mixed("0 1:1\n-1 1:1\n");
    CHECK(kind_of([&] { parse_libsvm(mixed, Family::kLogistic); }) == ErrorKind::kLabelDomain);
  }

  TEST_CASE("csv") {
    std::istringstream in("a,b,y\n1,2,1\n3,4.5,0\n");
    const Dataset d = parse_csv(in, Family::kLogistic);
    CHECK(d.n() == 2);
    CHECK(d.d() == 2);
    CHECK(d.x().coeff(1, 1) == 4.5);
    CHECK(d.y()[1] == -1.0);
    std::istringstream ragged("a,y\n1,2\n1,2,3\n");
    CHECK(kind_of([&] { parse_csv(ragged, Family::kLinear); }) == ErrorKind::kParseError);
    std::istringstream none("");
    CHECK(kind_of([&] { parse_csv(none, Family::kLinear); }) == ErrorKind::kParseError);
    CHECK(kind_of([&] { load_dataset("/nonexistent/file", DataFormat::kCsv, Family::kLinear); }) ==
          ErrorKind::kIoError);
  }

  TEST_CASE("write then load is bit-identical") {
    const Dataset src = testutil::synthetic(25, 9, Family::kLinear, 17);
    const auto lib = scratch("rt.libsvm");
    const auto csv = scratch("rt.csv");
    write_libsvm(src, lib.string());
    write_csv(src, csv.string());
    for (const Dataset& back :
         {load_dataset(lib.string(), DataFormat::kLibsvm, Family::kLinear, src.d()),
          load_dataset(csv.string(), DataFormat::kCsv, Family::kLinear)}) {
      REQUIRE(back.d() == src.d());
      CHECK((back.x().to_dense() - src.x().to_dense()).cwiseAbs().maxCoeff() == 0.0);
      CHECK((back.y() - src.y()).cwiseAbs().maxCoeff() == 0.0);
    }
  }

  TEST_CASE("rcv1 subsetting keeps the most frequent columns") {
    const auto in = scratch("mini_rcv1.libsvm");
    {
      std::ofstream out(in);
      for (int i = 0; i < 20; ++i) {
        out << (i % 2 ? "1" : "-1") << " 1:0.5";
        if (i % 3 == 0) out << " 2:1";
        out << " 3:" << (i + 1) << " 4:0.1\n";
      }
    }
    const auto out = scratch("mini_rcv1.out");
    const Dataset d = preprocess_rcv1(in.string(), out.string(), 10, 3, 4);
    CHECK(d.n() == 10);
    CHECK(d.d() == 3);
    const Dataset again = preprocess_rcv1(in.string(), scratch("mini2.out").string(), 10, 3, 4);
    CHECK((again.x().to_dense() - d.x().to_dense()).norm() == 0.0);
    CHECK(slurp(out) == slurp(scratch("mini2.out")));
  }

  TEST_CASE("format names") {
    CHECK(data_format_from_string("csv") == DataFormat::kCsv);
    CHECK(to_string(DataFormat::kLibsvm) == "libsvm");
    CHECK_THROWS_AS(data_format_from_string("parquet"), Error);
  }
}

TEST_SUITE("report") {
  TEST_CASE("derive_seed") {
    CHECK(derive_seed(17, {}) == 17);
    CHECK(derive_seed(17, {std::string("a"), 3LL}) == derive_seed(17, {std::string("a"), 3LL}));
    std::set<std::uint64_t> outs;
    for (long long i = 0; i < 10000; ++i) outs.insert(derive_seed(5, {std::string("cell"), i}));
    CHECK(outs.size() == 10000);
    CHECK(derive_seed(5, {std::string("1")}) != derive_seed(5, {1LL}));
    CHECK(derive_seed(5, {1LL, 2LL}) != derive_seed(5, {2LL, 1LL}));
  }

  TEST_CASE("null numbers carry reasons") {
    nlohmann::json j;
    put_number(j, "loo", std::nullopt);
    CHECK(j["loo"].is_null());
    CHECK(j["loo_reason"] == "not-computed");
    put_number(j, "x", std::numeric_limits<double>::quiet_NaN());
    CHECK(j["x_reason"] == "nan");
    put_number(j, "y", std::numeric_limits<double>::infinity());
    CHECK(j["y_reason"] == "infinite");
    put_number(j, "x", 2.0);
    CHECK(j["x"] == 2.0);
    CHECK_FALSE(j.contains("x_reason"));
  }

  TEST_CASE("emit then parse") {
    RunReport r;
    r.body["results"] = {{{"a", 1.5}, {"b", "text"}}};
    put_number(r.body, "loo", std::nullopt);
    r.rows.push_back({"ij,restricted", 10, 4, "aloo", 0.25, "0"});
    r.rows.push_back({"exact", 10, 4, "loo", std::nullopt, "median"});
    const auto path = scratch("report.json");
    emit_report(r, path.string());
    const nlohmann::json back = nlohmann::json::parse(slurp(path));
    CHECK(back["results"] == r.body["results"]);
    CHECK(back["loo"].is_null());
    CHECK(back["loo_reason"] == "not-computed");
    CHECK(back["artifact_version"] == kArtifactVersion);
    CHECK(back.contains("generated_at"));
    const std::string csv = slurp(csv_path_for(path.string()));
    CHECK(csv == "method,N,D,metric,value,seed\n\"ij,restricted\",10,4,aloo,0.25,0\nexact,10,4,loo,,median\n");
    CHECK(kind_of([&] { emit_report(r, "/nonexistent/dir/x.json"); }) == ErrorKind::kIoError);
  }

  TEST_CASE("median") {
    CHECK(!median({}).has_value());
    CHECK(*median({3.0, 1.0, 2.0}) == 2.0);
    CHECK(*median({4.0, 1.0, 2.0, 3.0}) == 2.5);
    CHECK(*median({1.0, std::numeric_limits<double>::quiet_NaN(), 5.0}) == 3.0);
  }
}
