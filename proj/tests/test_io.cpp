#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "cavreg/csv.hpp"
#include "cavreg/quadrature.hpp"
#include "cavreg/rng.hpp"
#include "cavreg/stats.hpp"

using namespace cavreg;

TEST_CASE("format_double round-trips exactly") {
  Rng rng(1);
  for (int i = 0; i < 2000; ++i) {
    const double v = rng.gauss() * std::pow(10.0, rng.uniform(-12, 12));
    const std::string s = format_double(v);
    CHECK(std::stod(s) == v);
  }
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(0.0) == "0");
}

TEST_CASE("csv builder layout") {
  CsvBuilder csv({"a", "b"});
  csv.add_comment("hello");
  csv.add_row({"1", "2"});
  csv.add_row({"3", "4"});
  CHECK(csv.str() == "# hello\na,b\n1,2\n3,4\n");
  CHECK_THROWS(csv.add_row({"only-one"}));
}

TEST_CASE("atomic write leaves no temp file") {
  const std::string path = "/tmp/cavreg_io_test.csv";
  write_file_atomic(path, "x,y\n1,2\n");
  std::ifstream f(path);
  std::stringstream ss;
  ss << f.rdbuf();
  CHECK(ss.str() == "x,y\n1,2\n");
  std::ifstream tmp(path + ".tmp");
  CHECK_FALSE(tmp.good());
  std::remove(path.c_str());
}

TEST_CASE("fnv1a is stable") {
  CHECK(fnv1a("") == 0xcbf29ce484222325ull);
  CHECK(fnv1a("a") != fnv1a("b"));
  CHECK(fnv1a("config") == fnv1a("config"));
}

TEST_CASE("pairwise sum accuracy") {
  std::vector<double> small{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16};
  CHECK(pairwise_sum(small) == 136.0);

  // 1e7 * 0.1: naive accumulation drifts at ~1e-9 relative; pairwise holds
  // far tighter
  std::vector<double> v(10'000'000, 0.1);
  CHECK(pairwise_sum(v) == doctest::Approx(1e6).epsilon(1e-12));
}

TEST_CASE("quadrature rules integrate polynomials exactly") {
  // Gauss-Legendre order n is exact through degree 2n-1
  const QuadRule& gl = gauss_legendre(8);
  double s = 0.0;
  for (std::size_t i = 0; i < gl.x.size(); ++i) {
    s += gl.w[i] * std::pow(gl.x[i], 10);
  }
  CHECK(s == doctest::Approx(2.0 / 11.0).epsilon(1e-13));

  // Gauss-Hermite: E[X^4] = 3 sigma^4 under the folded transform
  const double m4 = gh_expect([](double x) { return x * x * x * x; }, 1.3, 61);
  CHECK(m4 == doctest::Approx(3.0 * std::pow(1.3, 4)).epsilon(1e-12));
}

TEST_CASE("graded expectation handles a step discontinuity exactly") {
  // E[1{X > a}] for X ~ N(0, sigma^2) with the break as a panel edge
  const double sigma = 0.8, a = 0.37;
  const auto got = gauss_expect2_graded(
      [&](double x) -> std::array<double, 2> {
        return {x > a ? 1.0 : 0.0, x * x};
      },
      sigma, {a}, sigma / 8.0, 1e-9, "step test");
  CHECK(got[0] == doctest::Approx(normal_tail(a / sigma)).epsilon(1e-9));
  CHECK(got[1] == doctest::Approx(sigma * sigma).epsilon(1e-9));
}
