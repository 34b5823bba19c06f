#ifndef PARFIT_CONFIG_HPP
#define PARFIT_CONFIG_HPP

#include <fstream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "parfit/engine.hpp"
#include "parfit/errors.hpp"
#include "parfit/fit.hpp"
#include "parfit/pdf.hpp"
#include "parfit/variable.hpp"

namespace parfit {

using json = nlohmann::json;

// Declarative model description: the data-side replacement for writing the
// construction code by hand. Parsed from JSON, buildable into a PdfNode
// graph plus Variables.

struct ObservableSpec {
  std::string name;
  double lower = 0, upper = 1;
  std::size_t bins = 100;
  bool operator==(const ObservableSpec&) const = default;
};

struct ParameterSpec {
  std::string name;
  double init = 0, step = 0.1, lower = 0, upper = 1;
  bool operator==(const ParameterSpec&) const = default;
};

struct NodeSpec {
  std::string type; // exponential|gaussian|breit_wigner|polynomial|product|sum|composite|mapped|convolution
  std::string name;
  std::string observable;              // primitives
  std::vector<std::string> parameters; // primitives: node-local parameter names
  std::vector<NodeSpec> children;      // combinators (composite: outer, inner; convolution: model, resolution)
  std::vector<std::string> fractions;  // sum
  std::vector<double> boundaries;      // mapped
  std::size_t quadrature_points = 1024; // convolution
  bool operator==(const NodeSpec&) const = default;
};

struct ModelConfig {
  std::vector<ObservableSpec> observables;
  std::vector<ParameterSpec> parameters;
  NodeSpec pdf;
  MetricKind metric = MetricKind::NegLogLikelihood;
  FitConfig fit_config;
  std::size_t grid_points = 1024;
  bool operator==(const ModelConfig& o) const {
    return observables == o.observables && parameters == o.parameters &&
           pdf == o.pdf && metric == o.metric && grid_points == o.grid_points &&
           fit_config.minimizer == o.fit_config.minimizer &&
           fit_config.max_iterations == o.fit_config.max_iterations &&
           fit_config.gradient_tolerance == o.fit_config.gradient_tolerance &&
           fit_config.simplex_tolerance == o.fit_config.simplex_tolerance;
  }
};

namespace detail {

[[noreturn]] inline void schema_error(const std::string& path, const std::string& msg) {
  throw Error("schema-error", path + ": " + msg);
}

inline const json& require(const json& j, const std::string& key,
                           const std::string& path) {
  if (!j.is_object() || !j.contains(key)) schema_error(path + "." + key, "missing key");
  return j.at(key);
}

inline double require_number(const json& j, const std::string& key,
                             const std::string& path) {
  const json& v = require(j, key, path);
  if (!v.is_number()) schema_error(path + "." + key, "expected a number");
  return v.get<double>();
}

inline std::string require_string(const json& j, const std::string& key,
                                  const std::string& path) {
  const json& v = require(j, key, path);
  if (!v.is_string()) schema_error(path + "." + key, "expected a string");
  return v.get<std::string>();
}

inline NodeSpec parse_node(const json& j, const std::string& path) {
  NodeSpec n;
  n.type = require_string(j, "type", path);
  n.name = require_string(j, "name", path);
  auto parse_children = [&](const char* key, std::size_t min_count) {
    const json& c = require(j, key, path);
    if (!c.is_array() || c.size() < min_count)
      schema_error(path + "." + key, "expected an array of nodes");
    for (std::size_t i = 0; i < c.size(); ++i)
      n.children.push_back(parse_node(c[i], path + "." + std::string(key) + "[" +
                                                std::to_string(i) + "]"));
  };
  if (n.type == "exponential" || n.type == "gaussian" || n.type == "breit_wigner" ||
      n.type == "polynomial") {
    n.observable = require_string(j, "observable", path);
    const json& p = require(j, "parameters", path);
    if (!p.is_array() || p.empty())
      schema_error(path + ".parameters", "expected a non-empty array of names");
    for (const auto& e : p) n.parameters.push_back(e.get<std::string>());
  } else if (n.type == "product" || n.type == "sum") {
    parse_children("children", 2);
    if (n.type == "sum") {
      const json& f = require(j, "fractions", path);
      for (const auto& e : f) n.fractions.push_back(e.get<std::string>());
    }
  } else if (n.type == "composite") {
    n.children.push_back(parse_node(require(j, "outer", path), path + ".outer"));
    n.children.push_back(parse_node(require(j, "inner", path), path + ".inner"));
  } else if (n.type == "mapped") {
    const json& b = require(j, "boundaries", path);
    for (const auto& e : b) n.boundaries.push_back(e.get<double>());
    parse_children("targets", 1);
  } else if (n.type == "convolution") {
    n.children.push_back(parse_node(require(j, "model", path), path + ".model"));
    n.children.push_back(
        parse_node(require(j, "resolution", path), path + ".resolution"));
    if (j.contains("quadrature_points"))
      n.quadrature_points = j.at("quadrature_points").get<std::size_t>();
  } else {
    schema_error(path + ".type", "unknown pdf type '" + n.type + "'");
  }
  return n;
}

inline json node_to_json(const NodeSpec& n) {
  json j;
  j["type"] = n.type;
  j["name"] = n.name;
  if (!n.observable.empty()) j["observable"] = n.observable;
  if (!n.parameters.empty()) j["parameters"] = n.parameters;
  if (n.type == "product" || n.type == "sum") {
    json c = json::array();
    for (const auto& ch : n.children) c.push_back(node_to_json(ch));
    j["children"] = c;
    if (n.type == "sum") j["fractions"] = n.fractions;
  } else if (n.type == "composite") {
    j["outer"] = node_to_json(n.children[0]);
    j["inner"] = node_to_json(n.children[1]);
  } else if (n.type == "mapped") {
    j["boundaries"] = n.boundaries;
    json t = json::array();
    for (const auto& ch : n.children) t.push_back(node_to_json(ch));
    j["targets"] = t;
  } else if (n.type == "convolution") {
    j["model"] = node_to_json(n.children[0]);
    j["resolution"] = node_to_json(n.children[1]);
    j["quadrature_points"] = n.quadrature_points;
  }
  return j;
}

} // namespace detail

inline ModelConfig parse_model_config(const json& j) {
  using detail::require;
  using detail::require_number;
  using detail::require_string;
  using detail::schema_error;
  ModelConfig cfg;
  const json& obs = require(j, "observables", "$");
  if (!obs.is_array() || obs.empty()) schema_error("$.observables", "expected a non-empty array");
  for (std::size_t i = 0; i < obs.size(); ++i) {
    std::string path = "$.observables[" + std::to_string(i) + "]";
    ObservableSpec o;
    o.name = require_string(obs[i], "name", path);
    o.lower = require_number(obs[i], "lower", path);
    o.upper = require_number(obs[i], "upper", path);
    if (obs[i].contains("bins")) o.bins = obs[i].at("bins").get<std::size_t>();
    cfg.observables.push_back(o);
  }
  const json& pars = require(j, "parameters", "$");
  for (std::size_t i = 0; i < pars.size(); ++i) {
    std::string path = "$.parameters[" + std::to_string(i) + "]";
    ParameterSpec p;
    p.name = require_string(pars[i], "name", path);
    p.init = require_number(pars[i], "init", path);
    p.step = require_number(pars[i], "step", path);
    p.lower = require_number(pars[i], "lower", path);
    p.upper = require_number(pars[i], "upper", path);
    cfg.parameters.push_back(p);
  }
  cfg.pdf = detail::parse_node(require(j, "pdf", "$"), "$.pdf");
  if (j.contains("metric")) {
    std::string m = j.at("metric").get<std::string>();
    if (m == "nll")
      cfg.metric = MetricKind::NegLogLikelihood;
    else if (m == "chisq")
      cfg.metric = MetricKind::ChiSquared;
    else
      schema_error("$.metric", "expected 'nll' or 'chisq'");
  }
  if (j.contains("grid_points")) cfg.grid_points = j.at("grid_points").get<std::size_t>();
  if (j.contains("minimizer")) {
    const json& m = j.at("minimizer");
    if (m.contains("algorithm")) {
      std::string a = m.at("algorithm").get<std::string>();
      if (a == "quasi-newton")
        cfg.fit_config.minimizer = MinimizerKind::QuasiNewton;
      else if (a == "nelder-mead")
        cfg.fit_config.minimizer = MinimizerKind::NelderMead;
      else
        schema_error("$.minimizer.algorithm", "expected 'quasi-newton' or 'nelder-mead'");
    }
    if (m.contains("max_iterations"))
      cfg.fit_config.max_iterations = m.at("max_iterations").get<std::size_t>();
    if (m.contains("gradient_tolerance"))
      cfg.fit_config.gradient_tolerance = m.at("gradient_tolerance").get<double>();
    if (m.contains("simplex_tolerance"))
      cfg.fit_config.simplex_tolerance = m.at("simplex_tolerance").get<double>();
  }
  return cfg;
}

inline json model_config_to_json(const ModelConfig& cfg) {
  json j;
  j["observables"] = json::array();
  for (const auto& o : cfg.observables)
    j["observables"].push_back(
        {{"name", o.name}, {"lower", o.lower}, {"upper", o.upper}, {"bins", o.bins}});
  j["parameters"] = json::array();
  for (const auto& p : cfg.parameters)
    j["parameters"].push_back({{"name", p.name},
                               {"init", p.init},
                               {"step", p.step},
                               {"lower", p.lower},
                               {"upper", p.upper}});
  j["pdf"] = detail::node_to_json(cfg.pdf);
  j["metric"] = cfg.metric == MetricKind::NegLogLikelihood ? "nll" : "chisq";
  j["grid_points"] = cfg.grid_points;
  j["minimizer"] = {
      {"algorithm",
       cfg.fit_config.minimizer == MinimizerKind::QuasiNewton ? "quasi-newton"
                                                              : "nelder-mead"},
      {"max_iterations", cfg.fit_config.max_iterations},
      {"gradient_tolerance", cfg.fit_config.gradient_tolerance},
      {"simplex_tolerance", cfg.fit_config.simplex_tolerance}};
  return j;
}

inline ModelConfig load_model_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("io-error", "cannot open config '" + path + "'");
  json j;
  try {
    f >> j;
  } catch (const std::exception& e) {
    throw Error("schema-error", std::string("config parse failure: ") + e.what());
  }
  return parse_model_config(j);
}

// Materialized model: Variables plus the PDF graph, name-resolved.
struct BuiltModel {
  std::vector<VariablePtr> observables;
  std::vector<VariablePtr> parameters;
  std::map<std::string, VariablePtr> by_name;
  PdfPtr pdf;
};

namespace detail {

inline PdfPtr build_node(const NodeSpec& n, BuiltModel& m, const std::string& path) {
  auto obs = [&](const std::string& name) -> VariablePtr {
    auto it = m.by_name.find(name);
    if (it == m.by_name.end() || it->second->role != Role::Observable)
      schema_error(path + ".observable", "unknown observable '" + name + "'");
    return it->second;
  };
  auto par = [&](const std::string& name) -> VariablePtr {
    auto it = m.by_name.find(name);
    if (it == m.by_name.end() || it->second->role != Role::Parameter)
      schema_error(path + ".parameters", "unknown parameter '" + name + "'");
    return it->second;
  };
  auto arity = [&](std::size_t want) {
    if (n.parameters.size() != want)
      schema_error(path + ".parameters", "'" + n.type + "' takes " +
                                             std::to_string(want) + " parameters");
  };
  if (n.type == "exponential") {
    arity(1);
    return exp_pdf(n.name, obs(n.observable), par(n.parameters[0]));
  }
  if (n.type == "gaussian") {
    arity(2);
    return gaussian_pdf(n.name, obs(n.observable), par(n.parameters[0]),
                        par(n.parameters[1]));
  }
  if (n.type == "breit_wigner") {
    arity(2);
    return breit_wigner_pdf(n.name, obs(n.observable), par(n.parameters[0]),
                            par(n.parameters[1]));
  }
  if (n.type == "polynomial") {
    std::vector<VariablePtr> coeffs;
    for (const auto& c : n.parameters) coeffs.push_back(par(c));
    return polynomial_pdf(n.name, obs(n.observable), std::move(coeffs));
  }
  if (n.type == "product" || n.type == "sum") {
    std::vector<PdfPtr> children;
    for (std::size_t i = 0; i < n.children.size(); ++i)
      children.push_back(build_node(n.children[i], m,
                                    path + ".children[" + std::to_string(i) + "]"));
    if (n.type == "product") return prod_pdf(n.name, std::move(children));
    std::vector<VariablePtr> fractions;
    for (const auto& f : n.fractions) fractions.push_back(par(f));
    return add_pdf(n.name, std::move(children), std::move(fractions));
  }
  if (n.type == "composite")
    return composite_pdf(n.name, build_node(n.children[0], m, path + ".outer"),
                         build_node(n.children[1], m, path + ".inner"));
  if (n.type == "mapped") {
    std::vector<PdfPtr> targets;
    for (std::size_t i = 0; i < n.children.size(); ++i)
      targets.push_back(build_node(n.children[i], m,
                                   path + ".targets[" + std::to_string(i) + "]"));
    return mapped_pdf(n.name, n.boundaries, std::move(targets));
  }
  if (n.type == "convolution")
    return convolution_pdf(n.name, build_node(n.children[0], m, path + ".model"),
                           build_node(n.children[1], m, path + ".resolution"),
                           n.quadrature_points);
  schema_error(path + ".type", "unknown pdf type '" + n.type + "'");
}

} // namespace detail

inline BuiltModel build_model(const ModelConfig& cfg) {
  BuiltModel m;
  for (const auto& o : cfg.observables) {
    auto v = new_observable(o.name, o.lower, o.upper);
    m.observables.push_back(v);
    if (!m.by_name.emplace(o.name, v).second)
      detail::schema_error("$.observables", "duplicate name '" + o.name + "'");
  }
  for (const auto& p : cfg.parameters) {
    auto v = new_parameter(p.name, p.init, p.step, p.lower, p.upper);
    m.parameters.push_back(v);
    if (!m.by_name.emplace(p.name, v).second)
      detail::schema_error("$.parameters", "duplicate name '" + p.name + "'");
  }
  m.pdf = detail::build_node(cfg.pdf, m, "$.pdf");
  return m;
}

} // namespace parfit

#endif
