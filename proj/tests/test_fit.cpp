#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "parfit/parfit.hpp"

using namespace parfit;

namespace {

double uniform01(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

// Listing-style inverse transform for a truncated exponential on [0, upper].
double sample_trunc_exp(double alpha, double upper, double u) {
  return std::log(1.0 + u * (std::exp(alpha * upper) - 1.0)) / alpha;
}

UnbinnedDataSet make_exp_toy(const VariablePtr& x, double alpha, std::size_t n,
                             std::uint64_t seed) {
  UnbinnedDataSet data(x);
  std::mt19937_64 gen(seed);
  for (std::size_t i = 0; i < n; ++i) {
    x->value = sample_trunc_exp(alpha, x->upper, uniform01(gen));
    data.add_event();
  }
  return data;
}

} // namespace

TEST_CASE("sin transform endpoints and round trip") {
  ParameterRegistry reg;
  auto p = new_parameter("p", 0, 0.1, -10, 10);
  reg.register_parameter(p);
  BoundTransform tr(reg);

  CHECK(tr.to_internal(0, 0.0) == doctest::Approx(0.0).epsilon(1e-15)); // midpoint
  CHECK(tr.to_internal(0, 10.0) ==
        doctest::Approx(std::numbers::pi / 2).epsilon(1e-12)); // upper edge
  CHECK(tr.to_external(0, 0.0) == doctest::Approx(0.0));
  CHECK(tr.to_external(0, std::numbers::pi / 2) == doctest::Approx(10.0));

  std::mt19937_64 gen(5);
  for (int i = 0; i < 1000; ++i) {
    double pv = -10 + 20 * uniform01(gen);
    CHECK(tr.to_external(0, tr.to_internal(0, pv)) ==
          doctest::Approx(pv).epsilon(1e-12));
  }
}

TEST_CASE("numeric gradient on polynomial objectives") {
  Objective quad = [](const std::vector<double>& u) {
    return 3.0 * u[0] * u[0] + 2.0 * u[0] * u[1] + u[1] * u[1] - u[0];
  };
  std::vector<double> u{0.7, -1.3};
  std::vector<double> h{1e-5, 1e-5};
  auto g = numeric_gradient(quad, u, h);
  CHECK(g[0] == doctest::Approx(6 * 0.7 + 2 * (-1.3) - 1).epsilon(1e-6));
  CHECK(g[1] == doctest::Approx(2 * 0.7 + 2 * (-1.3)).epsilon(1e-6));

  Objective constant = [](const std::vector<double>&) { return 4.5; };
  auto gz = numeric_gradient(constant, u, h);
  CHECK(gz[0] == 0.0);
  CHECK(gz[1] == 0.0);
}

TEST_CASE("numeric gradient falls back one-sided on non-finite probes") {
  Objective half = [](const std::vector<double>& u) {
    if (u[0] < 0) return std::numeric_limits<double>::quiet_NaN();
    return u[0] * u[0];
  };
  std::vector<double> u{0.0};
  std::vector<double> h{1e-4};
  bool flagged = false;
  auto g = numeric_gradient(half, u, h, &flagged);
  CHECK(flagged);
  CHECK(g[0] == doctest::Approx(1e-4).epsilon(1e-6)); // (f(h)-f(0))/h = h
}

TEST_CASE("gradient Richardson consistency on a toy NLL") {
  auto x = new_observable("x", 0, 21.49);
  auto alpha = new_parameter("alpha", -2, 0.1, -10, 10);
  auto data = make_exp_toy(x, -2.0, 20000, 42);
  BoundModel bm(exp_pdf("e", x, alpha), data);
  BoundTransform tr(bm.registry());
  Objective obj = [&](const std::vector<double>& u) {
    return bm.eval_metric(tr.to_external(u), MetricKind::NegLogLikelihood,
                          Backend::serial());
  };
  std::mt19937_64 gen(7);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> u{tr.to_internal(0, -3 + 2 * uniform01(gen))};
    double h = tr.fd_step(0, u[0]);
    auto g_h = numeric_gradient(obj, u, {h});
    auto g_h2 = numeric_gradient(obj, u, {h / 2});
    // the extrapolated estimate is h^4-accurate: halving the step must not
    // move the value beyond the rounding floor of the summed metric
    CHECK(std::abs(g_h[0] - g_h2[0]) <= 1e-5 * std::max(1.0, std::abs(g_h[0])));
  }
}

TEST_CASE("bfgs converges on a quadratic bowl in under 50 iterations") {
  Objective bowl = [](const std::vector<double>& u) {
    double a = u[0] - 1.5, b = u[1] + 0.5;
    return 2.0 * a * a + 0.5 * b * b + 3.0;
  };
  FitConfig cfg;
  std::size_t calls = 0;
  Objective counted = [&](const std::vector<double>& u) {
    ++calls;
    return bowl(u);
  };
  auto grad = [&](const std::vector<double>& u) {
    return numeric_gradient(counted, u, {1e-6, 1e-6});
  };
  auto out = detail::bfgs(counted, {0.0, 0.0}, cfg, grad);
  CHECK(out.status == FitStatus::Converged);
  CHECK(out.u[0] == doctest::Approx(1.5).epsilon(1e-5));
  CHECK(out.u[1] == doctest::Approx(-0.5).epsilon(1e-5));
  CHECK(calls < 50 * 6); // iterations x (line search + gradient probes)
  CHECK(max_norm(out.grad) <= cfg.gradient_tolerance);
}

TEST_CASE("covariance of a 1d quadratic is the inverse curvature") {
  double k = 4.0;
  Objective f = [&](const std::vector<double>& u) {
    return 0.5 * k * (u[0] - 0.3) * (u[0] - 0.3);
  };
  auto cov = covariance(f, {0.3}, {1e-3});
  REQUIRE(!cov.empty());
  CHECK(cov[0][0] == doctest::Approx(1.0 / k).epsilon(1e-6));
}

TEST_CASE("covariance of a separable 2d problem is near-diagonal") {
  Objective f = [](const std::vector<double>& u) {
    return 0.5 * 2.0 * u[0] * u[0] + 0.5 * 8.0 * u[1] * u[1];
  };
  auto cov = covariance(f, {0.0, 0.0}, {1e-3, 1e-3});
  REQUIRE(!cov.empty());
  CHECK(std::abs(cov[0][1]) <= 1e-3 * std::max(cov[0][0], cov[1][1]));
}

TEST_CASE("non positive definite hessian flags uncertainties unavailable") {
  Objective saddle = [](const std::vector<double>& u) {
    return u[0] * u[0] - u[1] * u[1];
  };
  auto cov = covariance(saddle, {0.0, 0.0}, {1e-3, 1e-3});
  CHECK(cov.empty());
}

TEST_CASE("exponential toy fit recovers alpha") {
  auto x = new_observable("xvar", 0, 21.49);
  auto alpha = new_parameter("alpha", -1.0, 0.5, -10, 10); // start off-truth
  auto data = make_exp_toy(x, -2.0, 20000, 1234);
  BoundModel bm(exp_pdf("exppdf", x, alpha), data);
  FitResult res = fit(bm, MetricKind::NegLogLikelihood, Backend::serial());
  REQUIRE(res.converged());
  REQUIRE(res.uncertainties_available);
  double se = res.uncertainties[0];
  CHECK(se == doctest::Approx(2.0 / std::sqrt(20000.0)).epsilon(0.3));
  CHECK(std::abs(res.params[0] - (-2.0)) < 5 * se);
  CHECK(res.grad_max_norm <= 1e-6);
  CHECK(alpha->value == res.params[0]); // written back
}

TEST_CASE("gaussian mean standard error scales as sigma over sqrt n") {
  auto x = new_observable("x", -5, 5);
  auto mean = new_parameter("mean", 0.3, 0.5, -4, 4);
  auto sigma = new_parameter("sigma", 1.1, 0.5, 0.2, 4);
  UnbinnedDataSet data(x);
  std::mt19937_64 gen(99);
  std::size_t n = 4000;
  for (std::size_t i = 0; i < n;) {
    // Box-Muller, truth mean 0, sigma 1
    double u1 = uniform01(gen), u2 = uniform01(gen);
    if (u1 <= 0) continue;
    double z = std::sqrt(-2 * std::log(u1)) * std::cos(2 * std::numbers::pi * u2);
    if (std::abs(z) >= 5) continue;
    x->value = z;
    data.add_event();
    ++i;
  }
  BoundModel bm(gaussian_pdf("g", x, mean, sigma), data);
  FitResult res = fit(bm, MetricKind::NegLogLikelihood, Backend::serial());
  REQUIRE(res.converged());
  REQUIRE(res.uncertainties_available);
  CHECK(res.uncertainties[0] ==
        doctest::Approx(1.0 / std::sqrt(static_cast<double>(n))).epsilon(0.2));
}

TEST_CASE("fixed parameters hold their value and report zero uncertainty") {
  auto x = new_observable("x", -5, 5);
  auto mean = new_parameter("mean", 0.3, 0.5, -4, 4);
  auto sigma = new_parameter("sigma", 1.0, 0.5, 0.2, 4);
  sigma->fixed = true;
  UnbinnedDataSet data(x);
  std::mt19937_64 gen(31);
  for (std::size_t i = 0; i < 2000;) {
    double u1 = uniform01(gen), u2 = uniform01(gen);
    if (u1 <= 0) continue;
    double z = std::sqrt(-2 * std::log(u1)) * std::cos(2 * std::numbers::pi * u2);
    if (std::abs(z) >= 5) continue;
    x->value = z;
    data.add_event();
    ++i;
  }
  BoundModel bm(gaussian_pdf("g", x, mean, sigma), data);
  FitResult res = fit(bm, MetricKind::NegLogLikelihood, Backend::serial());
  REQUIRE(res.converged());
  REQUIRE(res.params.size() == 2);
  CHECK(res.params[1] == 1.0); // untouched by the minimizer
  CHECK(sigma->value == 1.0);
  REQUIRE(res.uncertainties_available);
  CHECK(res.uncertainties[1] == 0.0);
  CHECK(res.uncertainties[0] > 0.0);
  CHECK(std::abs(res.params[0]) < 5 * res.uncertainties[0]);

  // fixing every parameter leaves nothing to minimize
  auto mean2 = new_parameter("mean", 0.3, 0.5, -4, 4);
  mean2->fixed = true;
  BoundModel all_fixed(gaussian_pdf("g", x, mean2, sigma), data);
  CHECK_THROWS_AS(fit(all_fixed, MetricKind::NegLogLikelihood, Backend::serial()),
                  Error);
}

TEST_CASE("transform safety: the objective never sees out-of-limit values") {
  auto x = new_observable("x", 0, 21.49);
  auto alpha = new_parameter("alpha", -1.0, 0.5, -3, -0.1);
  auto data = make_exp_toy(x, -2.0, 5000, 77);
  BoundModel bm(exp_pdf("e", x, alpha), data);

  // wrap eval through a registry probe after the fit: re-run and record
  BoundTransform tr(bm.registry());
  bool violated = false;
  Objective obj = [&](const std::vector<double>& u) {
    auto p = tr.to_external(u);
    if (p[0] < -3 || p[0] > -0.1) violated = true;
    return bm.eval_metric(p, MetricKind::NegLogLikelihood, Backend::serial());
  };
  auto grad = [&](const std::vector<double>& u) {
    return numeric_gradient(obj, u, {tr.fd_step(0, u[0])});
  };
  auto out = detail::bfgs(obj, tr.to_internal({-1.0}), FitConfig{}, grad);
  CHECK(out.status == FitStatus::Converged);
  CHECK_FALSE(violated);
}

TEST_CASE("minimizer agreement on the exponential problem") {
  auto x = new_observable("xvar", 0, 21.49);
  auto data = make_exp_toy(x, -2.0, 20000, 31415);

  auto run = [&](MinimizerKind mk) {
    auto alpha = new_parameter("alpha", -1.0, 0.5, -10, 10);
    BoundModel bm(exp_pdf("e", x, alpha), data);
    FitConfig cfg;
    cfg.minimizer = mk;
    return fit(bm, MetricKind::NegLogLikelihood, Backend::serial(), cfg);
  };
  auto qn = run(MinimizerKind::QuasiNewton);
  auto nm = run(MinimizerKind::NelderMead);
  REQUIRE(qn.converged());
  REQUIRE(nm.converged());
  CHECK(std::abs(qn.metric_value - nm.metric_value) <= 1e-4);
}

TEST_CASE("fit results are bitwise reproducible across runs and backends") {
  auto run = [&](const Backend& backend) {
    auto x = new_observable("xvar", 0, 21.49);
    auto alpha = new_parameter("alpha", -1.0, 0.5, -10, 10);
    auto data = make_exp_toy(x, -2.0, 10000, 2718);
    BoundModel bm(exp_pdf("e", x, alpha), data);
    return fit(bm, MetricKind::NegLogLikelihood, backend);
  };
  auto a = run(Backend::serial());
  auto b = run(Backend::serial());
  auto c = run(Backend::with_threads(4));
  REQUIRE(a.converged());
  CHECK(a.params[0] == b.params[0]);
  CHECK(a.params[0] == c.params[0]);
  CHECK(a.metric_value == c.metric_value);
}

TEST_CASE("failed start is reported, not thrown") {
  auto x = new_observable("x", 0, 10);
  auto m = new_parameter("m", 100, 0.5, 50, 200); // density vanishes on [0,10]
  auto s = new_parameter("s", 0.5, 0.1, 0.01, 5);
  UnbinnedDataSet data(x);
  x->value = 5;
  data.add_event();
  BoundModel bm(gaussian_pdf("far", x, m, s), data);
  // normalization is degenerate everywhere: objective is a flat penalty;
  // the minimizer must come back rather than fault
  FitResult res = fit(bm, MetricKind::NegLogLikelihood, Backend::serial());
  CHECK(res.status != FitStatus::Failed);
  CHECK(res.metric_value == kPenaltyValue);
}

TEST_CASE("fit report carries a stable key set") {
  auto x = new_observable("xvar", 0, 21.49);
  auto alpha = new_parameter("alpha", -1.0, 0.5, -10, 10);
  auto data = make_exp_toy(x, -2.0, 2000, 5);
  BoundModel bm(exp_pdf("e", x, alpha), data);
  FitResult res = fit(bm, MetricKind::NegLogLikelihood, Backend::serial());
  std::string rep = res.to_report();
  for (const char* key : {"status ", "metric_value ", "metric_calls ",
                          "wall_time_s ", "grad_max_norm ", "uncertainties ",
                          "param alpha "})
    CHECK(rep.find(key) != std::string::npos);
}
