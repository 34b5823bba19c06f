#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "parfit/parfit.hpp"

using namespace parfit;

namespace {

// truncated-exponential CDF on [0, upper], the closed form the sampler is
// checked against
double trunc_exp_cdf(double alpha, double upper, double x) {
  return (std::exp(alpha * x) - 1.0) / (std::exp(alpha * upper) - 1.0);
}

} // namespace

TEST_CASE("toy rng emits doubles in the unit interval") {
  ToyRng rng(7);
  for (int i = 0; i < 10000; ++i) {
    double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
  for (int i = 0; i < 1000; ++i) {
    double v = rng.uniform(-3, 5);
    CHECK(v >= -3.0);
    CHECK(v < 5.0);
  }
}

TEST_CASE("generation is deterministic per seed") {
  auto make = [](std::uint64_t seed) {
    auto x = new_observable("x", 0, 10);
    auto a = new_parameter("a", -0.5, 0.1, -5, 5);
    auto ds = generate_events(exp_pdf("e", x, a), {x}, 2000, seed);
    std::ostringstream out;
    write_text(ds, out);
    return out.str();
  };
  CHECK(make(42) == make(42)); // byte identical
  CHECK(make(42) != make(43));
}

TEST_CASE("uniform density gives a uniform sample") {
  auto x = new_observable("x", 2, 8);
  auto c0 = new_parameter("c0", 1, 0.1, 0.5, 2);
  std::size_t n = 20000;
  auto ds = generate_events(polynomial_pdf("u", x, {c0}), {x}, n, 11);
  double mean = 0, lo = 10, hi = 0;
  for (const auto& row : ds.rows()) {
    mean += row[0];
    lo = std::min(lo, row[0]);
    hi = std::max(hi, row[0]);
  }
  mean /= static_cast<double>(n);
  // mean of U(2,8) is 5 with sd = 6/sqrt(12 n)
  double sd = 6.0 / std::sqrt(12.0 * static_cast<double>(n));
  CHECK(std::abs(mean - 5.0) < 5 * sd);
  CHECK(lo >= 2.0);
  CHECK(hi <= 8.0);
}

TEST_CASE("accept-reject matches the inverse-transform law for the exponential") {
  auto x = new_observable("x", 0, 10);
  auto a = new_parameter("a", -0.7, 0.1, -5, 5);
  std::size_t n = 40000;
  auto ds = generate_events(exp_pdf("e", x, a), {x}, n, 2024);
  // empirical CDF against the closed form at the deciles; each comparison
  // is binomial with sd sqrt(F(1-F)/n)
  std::vector<double> xs;
  xs.reserve(n);
  for (const auto& row : ds.rows()) xs.push_back(row[0]);
  std::sort(xs.begin(), xs.end());
  for (double q : {1.0, 2.0, 3.0, 5.0, 8.0}) {
    double f = trunc_exp_cdf(-0.7, 10.0, q);
    auto it = std::upper_bound(xs.begin(), xs.end(), q);
    double emp = static_cast<double>(it - xs.begin()) / static_cast<double>(n);
    double sd = std::sqrt(f * (1 - f) / static_cast<double>(n));
    CHECK(std::abs(emp - f) < 5 * sd);
  }
}

TEST_CASE("gaussian sample has the requested moments") {
  auto x = new_observable("x", -6, 6);
  auto m = new_parameter("m", 1.2, 0.1, -4, 4);
  auto s = new_parameter("s", 0.8, 0.1, 0.1, 3);
  std::size_t n = 30000;
  auto ds = generate_events(gaussian_pdf("g", x, m, s), {x}, n, 5);
  double mean = 0;
  for (const auto& row : ds.rows()) mean += row[0];
  mean /= static_cast<double>(n);
  double var = 0;
  for (const auto& row : ds.rows()) var += (row[0] - mean) * (row[0] - mean);
  var /= static_cast<double>(n - 1);
  CHECK(std::abs(mean - 1.2) < 5 * 0.8 / std::sqrt(static_cast<double>(n)));
  CHECK(var == doctest::Approx(0.64).epsilon(0.05));
}

TEST_CASE("two-dimensional product samples factorize") {
  auto x = new_observable("x", 0, 5);
  auto y = new_observable("y", 0, 5);
  auto ax = new_parameter("ax", -2.4, 0.1, -5, 5);
  auto ay = new_parameter("ay", -1.1, 0.1, -5, 5);
  auto pdf = prod_pdf("p", {exp_pdf("ex", x, ax), exp_pdf("ey", y, ay)});
  std::size_t n = 30000;
  auto ds = generate_events(pdf, {x, y}, n, 99);
  double mx = 0, my = 0;
  for (const auto& row : ds.rows()) {
    mx += row[0];
    my += row[1];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  // analytic mean of a truncated exponential: 1/|a| - U/(exp(|a|U)-1)
  auto expect = [](double a, double u) {
    return 1.0 / -a - u / (std::exp(-a * u) - 1.0);
  };
  CHECK(mx == doctest::Approx(expect(-2.4, 5.0)).epsilon(0.03));
  CHECK(my == doctest::Approx(expect(-1.1, 5.0)).epsilon(0.03));
}

TEST_CASE("generated samples close the loop with the fitter") {
  auto x = new_observable("x", 0, 10);
  auto a = new_parameter("a", -0.7, 0.2, -5, -0.05);
  auto ds = generate_events(exp_pdf("gen", x, a), {x}, 20000, 314);
  auto afit = new_parameter("a", -0.3, 0.2, -5, -0.05); // start off-truth
  BoundModel bm(exp_pdf("fit", x, afit), ds);
  FitResult res = fit(bm, MetricKind::NegLogLikelihood, Backend::serial());
  REQUIRE(res.converged());
  REQUIRE(res.uncertainties_available);
  CHECK(std::abs(res.params[0] - (-0.7)) < 5 * res.uncertainties[0]);
}

TEST_CASE("degenerate requests are rejected") {
  auto x = new_observable("x", 0, 10);
  auto a = new_parameter("a", -0.5, 0.1, -5, 5);
  auto pdf = exp_pdf("e", x, a);
  CHECK_THROWS_WITH_AS(generate_events(pdf, {x}, 0, 1), doctest::Contains("n_events"),
                       Error);
}
