#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "parfit/parfit.hpp"

using namespace parfit;

namespace {

json exp_config() {
  return json::parse(R"({
    "observables": [{"name": "xvar", "lower": 0, "upper": 21.49, "bins": 64}],
    "parameters": [{"name": "alpha", "init": -2, "step": 0.5, "lower": -10, "upper": 10}],
    "pdf": {"type": "exponential", "name": "exppdf", "observable": "xvar",
            "parameters": ["alpha"]},
    "metric": "nll",
    "grid_points": 2048,
    "minimizer": {"algorithm": "nelder-mead", "max_iterations": 500,
                  "gradient_tolerance": 1e-5, "simplex_tolerance": 1e-9}
  })");
}

} // namespace

TEST_CASE("full config parses into the expected spec") {
  ModelConfig cfg = parse_model_config(exp_config());
  REQUIRE(cfg.observables.size() == 1);
  CHECK(cfg.observables[0].name == "xvar");
  CHECK(cfg.observables[0].upper == 21.49);
  CHECK(cfg.observables[0].bins == 64);
  REQUIRE(cfg.parameters.size() == 1);
  CHECK(cfg.parameters[0].init == -2);
  CHECK(cfg.parameters[0].step == 0.5);
  CHECK(cfg.pdf.type == "exponential");
  CHECK(cfg.pdf.parameters == std::vector<std::string>{"alpha"});
  CHECK(cfg.metric == MetricKind::NegLogLikelihood);
  CHECK(cfg.grid_points == 2048);
  CHECK(cfg.fit_config.minimizer == MinimizerKind::NelderMead);
  CHECK(cfg.fit_config.max_iterations == 500);
  CHECK(cfg.fit_config.gradient_tolerance == 1e-5);
  CHECK(cfg.fit_config.simplex_tolerance == 1e-9);
}

TEST_CASE("defaults apply when optional keys are absent") {
  json j = exp_config();
  j.erase("metric");
  j.erase("grid_points");
  j.erase("minimizer");
  ModelConfig cfg = parse_model_config(j);
  CHECK(cfg.metric == MetricKind::NegLogLikelihood);
  CHECK(cfg.grid_points == 1024);
  CHECK(cfg.fit_config.minimizer == MinimizerKind::QuasiNewton);
  CHECK(cfg.fit_config.max_iterations == 10000);
  CHECK(cfg.fit_config.gradient_tolerance == 1e-6);
  CHECK(cfg.fit_config.simplex_tolerance == 1e-8);
}

TEST_CASE("config round trips through serialization") {
  ModelConfig cfg = parse_model_config(exp_config());
  ModelConfig back = parse_model_config(model_config_to_json(cfg));
  CHECK(cfg == back);
}

TEST_CASE("nested combinator configs round trip") {
  json j = json::parse(R"({
    "observables": [{"name": "x", "lower": -5, "upper": 5}],
    "parameters": [
      {"name": "a", "init": -1, "step": 0.1, "lower": -5, "upper": 5},
      {"name": "m", "init": 0, "step": 0.1, "lower": -4, "upper": 4},
      {"name": "s", "init": 1, "step": 0.1, "lower": 0.1, "upper": 3},
      {"name": "f", "init": 0.5, "step": 0.01, "lower": 0, "upper": 1}
    ],
    "pdf": {"type": "sum", "name": "mix", "fractions": ["f"], "children": [
      {"type": "exponential", "name": "bg", "observable": "x", "parameters": ["a"]},
      {"type": "convolution", "name": "sig", "quadrature_points": 256,
       "model": {"type": "gaussian", "name": "core", "observable": "x",
                 "parameters": ["m", "s"]},
       "resolution": {"type": "gaussian", "name": "res", "observable": "x",
                      "parameters": ["m", "s"]}}
    ]}
  })");
  ModelConfig cfg = parse_model_config(j);
  CHECK(cfg.pdf.children.size() == 2);
  CHECK(cfg.pdf.children[1].type == "convolution");
  CHECK(cfg.pdf.children[1].quadrature_points == 256);
  ModelConfig back = parse_model_config(model_config_to_json(cfg));
  CHECK(cfg == back);
}

TEST_CASE("schema errors name the offending path") {
  json j = exp_config();
  j.erase("pdf");
  CHECK_THROWS_WITH_AS(parse_model_config(j), doctest::Contains("$.pdf"), Error);

  j = exp_config();
  j["parameters"][0].erase("init");
  CHECK_THROWS_WITH_AS(parse_model_config(j),
                       doctest::Contains("$.parameters[0].init"), Error);

  j = exp_config();
  j["observables"][0]["lower"] = "zero";
  CHECK_THROWS_WITH_AS(parse_model_config(j), doctest::Contains("expected a number"),
                       Error);

  j = exp_config();
  j["pdf"]["type"] = "lorentzian";
  CHECK_THROWS_WITH_AS(parse_model_config(j), doctest::Contains("unknown pdf type"),
                       Error);

  j = exp_config();
  j["metric"] = "likelihood";
  CHECK_THROWS_WITH_AS(parse_model_config(j), doctest::Contains("$.metric"), Error);

  j = exp_config();
  j["minimizer"]["algorithm"] = "minuit";
  CHECK_THROWS_WITH_AS(parse_model_config(j),
                       doctest::Contains("$.minimizer.algorithm"), Error);
}

TEST_CASE("built model evaluates like a hand-constructed one") {
  BuiltModel m = build_model(parse_model_config(exp_config()));
  REQUIRE(m.pdf);
  REQUIRE(m.observables.size() == 1);
  REQUIRE(m.parameters.size() == 1);
  CHECK(m.by_name.at("alpha")->value == -2);

  UnbinnedDataSet data(m.observables[0]);
  for (double v : {3.0, 5.0, 1.0}) {
    m.observables[0]->value = v;
    data.add_event();
  }
  BoundModel bm(m.pdf, data);
  double nll = bm.eval_metric(bm.registry().export_values(),
                              MetricKind::NegLogLikelihood, Backend::serial());

  auto x = new_observable("xvar", 0, 21.49);
  auto alpha = new_parameter("alpha", -2, 0.5, -10, 10);
  UnbinnedDataSet data2(x);
  for (double v : {3.0, 5.0, 1.0}) {
    x->value = v;
    data2.add_event();
  }
  BoundModel bm2(exp_pdf("exppdf", x, alpha), data2);
  double nll2 = bm2.eval_metric(bm2.registry().export_values(),
                                MetricKind::NegLogLikelihood, Backend::serial());
  CHECK(nll == nll2); // same graph, same table layout, bitwise equal
}

TEST_CASE("name resolution failures are schema errors") {
  json j = exp_config();
  j["pdf"]["observable"] = "yvar";
  CHECK_THROWS_WITH_AS(build_model(parse_model_config(j)),
                       doctest::Contains("unknown observable"), Error);

  j = exp_config();
  j["pdf"]["parameters"] = {"beta"};
  CHECK_THROWS_WITH_AS(build_model(parse_model_config(j)),
                       doctest::Contains("unknown parameter"), Error);

  j = exp_config();
  j["parameters"].push_back(j["parameters"][0]);
  CHECK_THROWS_WITH_AS(build_model(parse_model_config(j)),
                       doctest::Contains("duplicate name"), Error);
}

TEST_CASE("primitive parameter arity is enforced at build time") {
  json j = exp_config();
  j["pdf"]["type"] = "gaussian";
  CHECK_THROWS_WITH_AS(build_model(parse_model_config(j)),
                       doctest::Contains("takes 2 parameters"), Error);
}

TEST_CASE("load_model_config reports io and parse failures") {
  CHECK_THROWS_WITH_AS(load_model_config("/nonexistent/model.json"),
                       doctest::Contains("io-error"), Error);
  const char* path = "bad_config_tmp.json";
  {
    std::ofstream f(path);
    f << "{ not json";
  }
  CHECK_THROWS_WITH_AS(load_model_config(path), doctest::Contains("schema-error"),
                       Error);
  std::remove(path);
}

TEST_CASE("file round trip preserves the config") {
  ModelConfig cfg = parse_model_config(exp_config());
  const char* path = "config_roundtrip_tmp.json";
  {
    std::ofstream f(path);
    f << model_config_to_json(cfg).dump(2);
  }
  ModelConfig back = load_model_config(path);
  std::remove(path);
  CHECK(cfg == back);
}
