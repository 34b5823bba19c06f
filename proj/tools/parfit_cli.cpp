// parfit command-line front end: toy generation, fitting, thread-scaling
// benchmarks, and plot-data emission driven by a declarative JSON model.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "parfit/parfit.hpp"

namespace {

using namespace parfit;

struct BackendFlags {
  std::string backend = "serial"; // serial|threads
  unsigned threads = 0;           // 0: unset, fall back to PARFIT_THREADS/HW
};

Backend make_backend(const BackendFlags& flags) {
  if (flags.backend == "serial" && flags.threads == 0) return Backend::serial();
  unsigned n = flags.threads ? flags.threads : default_thread_count();
  return Backend::with_threads(n);
}

// Binned data is carried in the same text format as unbinned events; the
// histogram shape comes from the per-observable bin counts in the config.
BinnedDataSet bin_events(const ModelConfig& cfg, const BuiltModel& model,
                         const UnbinnedDataSet& events) {
  std::vector<std::size_t> bins;
  for (const auto& o : cfg.observables) bins.push_back(o.bins);
  BinnedDataSet binned(model.observables, bins);
  for (const auto& row : events.rows()) binned.fill(row);
  return binned;
}

void write_or_print(const std::string& out_path, const std::string& text) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(out_path);
  if (!f) throw Error("io-error", "cannot open '" + out_path + "' for writing");
  f << text;
}

// Pull fitted parameter values out of a FitResult text report.
void apply_report_values(const std::string& path, BuiltModel& model) {
  std::ifstream f(path);
  if (!f) throw Error("io-error", "cannot open fit result '" + path + "'");
  std::string key;
  std::string line;
  while (std::getline(f, line)) {
    std::istringstream ls(line);
    if (!(ls >> key) || key != "param") continue;
    std::string name;
    double value = 0, err = 0;
    if (!(ls >> name >> value >> err))
      throw Error("bad-format", "malformed param line in '" + path + "'");
    auto it = model.by_name.find(name);
    if (it == model.by_name.end() || it->second->role != Role::Parameter)
      throw Error("bad-format", "fit result names unknown parameter '" + name + "'");
    it->second->value = value;
  }
}

int cmd_generate(const std::string& config_path, std::size_t n_events,
                 std::uint64_t seed, const std::string& out_path) {
  ModelConfig cfg = load_model_config(config_path);
  BuiltModel model = build_model(cfg);
  auto data = generate_events(model.pdf, model.observables, n_events, seed,
                              GridSpec{cfg.grid_points});
  if (out_path.empty()) {
    write_text(data, std::cout);
  } else {
    write_text_file(data, out_path);
    std::cerr << "wrote " << data.n_events() << " events to " << out_path << '\n';
  }
  return 0;
}

int cmd_fit(const std::string& config_path, const std::string& data_path,
            const BackendFlags& flags, const std::string& out_path) {
  ModelConfig cfg = load_model_config(config_path);
  BuiltModel model = build_model(cfg);
  auto events = read_text_file(data_path, model.observables);

  FitResult result;
  GridSpec grid{cfg.grid_points};
  Backend backend = make_backend(flags);
  if (cfg.metric == MetricKind::ChiSquared) {
    BinnedDataSet binned = bin_events(cfg, model, events);
    BoundModel bm(model.pdf, binned, grid);
    result = fit(bm, cfg.metric, backend, cfg.fit_config);
  } else {
    BoundModel bm(model.pdf, events, grid);
    result = fit(bm, cfg.metric, backend, cfg.fit_config);
  }
  write_or_print(out_path, result.to_report());
  return result.converged() ? 0 : 1;
}

int cmd_bench(const std::string& config_path, const std::string& data_path,
              std::vector<unsigned> thread_counts, std::size_t repetitions,
              const std::string& out_path) {
  if (repetitions < 3)
    throw Error("bad-arity", "bench needs >= 3 repetitions");
  std::sort(thread_counts.begin(), thread_counts.end());
  thread_counts.erase(std::unique(thread_counts.begin(), thread_counts.end()),
                      thread_counts.end());
  if (thread_counts.size() < 2 ||
      std::find(thread_counts.begin(), thread_counts.end(), 1u) ==
          thread_counts.end())
    throw Error("bad-arity", "bench needs >= 2 thread counts including 1");

  ModelConfig cfg = load_model_config(config_path);
  BuiltModel model = build_model(cfg);
  auto events = read_text_file(data_path, model.observables);
  GridSpec grid{cfg.grid_points};

  struct Row {
    unsigned threads;
    double median_s;
    double metric_value;
    std::size_t metric_calls;
  };
  std::vector<Row> rows;
  std::vector<double> inits;
  for (const auto& p : cfg.parameters) inits.push_back(p.init);

  for (unsigned n : thread_counts) {
    Backend backend = Backend::with_threads(n);
    std::vector<double> times;
    FitResult last;
    for (std::size_t rep = 0; rep < repetitions; ++rep) {
      for (std::size_t i = 0; i < inits.size(); ++i)
        model.parameters[i]->value = inits[i]; // identical start every run
      FitResult r;
      if (cfg.metric == MetricKind::ChiSquared) {
        BinnedDataSet binned = bin_events(cfg, model, events);
        BoundModel bm(model.pdf, binned, grid);
        r = fit(bm, cfg.metric, backend, cfg.fit_config);
      } else {
        BoundModel bm(model.pdf, events, grid);
        r = fit(bm, cfg.metric, backend, cfg.fit_config);
      }
      times.push_back(r.wall_time_s);
      last = r;
    }
    std::sort(times.begin(), times.end());
    rows.push_back(Row{n, times[times.size() / 2], last.metric_value,
                       last.n_metric_calls});
  }

  // determinism gate: every row must land on the bitwise-identical metric
  for (const auto& row : rows)
    if (row.metric_value != rows.front().metric_value)
      throw Error("determinism-violation",
                  "metric value differs across thread counts: bench aborted");

  double t1 = 0;
  for (const auto& row : rows)
    if (row.threads == 1) t1 = row.median_s;
  std::ostringstream out;
  out << "backend threads time_s speedup metric_calls\n";
  char buf[64];
  for (const auto& row : rows) {
    double speedup = row.threads == 1 ? 1.0 : t1 / row.median_s;
    std::snprintf(buf, sizeof buf, "threads %u %.6g %.4g %zu\n", row.threads,
                  row.median_s, speedup, row.metric_calls);
    out << buf;
  }
  write_or_print(out_path, out.str());
  return 0;
}

int cmd_plotdata(const std::string& config_path, const std::string& data_path,
                 const std::string& result_path, std::size_t points,
                 const std::string& out_path) {
  ModelConfig cfg = load_model_config(config_path);
  if (cfg.observables.size() != 1)
    throw Error("unsupported",
                "plotdata needs a one-dimensional model (no projection flag)");
  if (points < 2) throw Error("bad-arity", "plotdata needs >= 2 points");
  BuiltModel model = build_model(cfg);
  auto events = read_text_file(data_path, model.observables);
  if (!result_path.empty()) apply_report_values(result_path, model);

  ParameterRegistry reg;
  IndexTable table = finalize(reg, model.pdf, model.observables);
  auto params = reg.export_values();
  model.pdf->refresh_normalizations(params, table, GridSpec{cfg.grid_points});

  const auto& obs = *model.observables.front();
  const double width = (obs.upper - obs.lower) / static_cast<double>(points);
  std::vector<double> contents(points, 0.0);
  for (const auto& row : events.rows()) {
    auto bin = static_cast<std::size_t>((row[0] - obs.lower) / width);
    if (bin >= points) bin = points - 1; // upper edge inclusive
    contents[bin] += 1.0;
  }
  const double n = static_cast<double>(events.n_events());

  std::ostringstream out;
  out << "# x model data data_error\n";
  std::vector<double> evt(table.n_columns(), 0.0);
  char buf[128];
  for (std::size_t b = 0; b < points; ++b) {
    double x = obs.lower + (static_cast<double>(b) + 0.5) * width;
    evt[model.pdf->box().front().second] = x;
    double density = model.pdf->density(evt, params, table);
    double data = contents[b] / (n * width);
    double err = std::sqrt(contents[b]) / (n * width);
    std::snprintf(buf, sizeof buf, "%.10g %.10g %.10g %.10g\n", x, density, data,
                  err);
    out << buf;
  }
  write_or_print(out_path, out.str());
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"composable PDF fitting over large event sets"};
  app.require_subcommand(1);

  std::string config_path, data_path, out_path, result_path;
  BackendFlags flags;
  std::uint64_t seed = 1;
  std::size_t n_events = 10000;
  std::size_t repetitions = 3;
  std::size_t points = 200;
  std::vector<unsigned> thread_counts;

  auto* gen = app.add_subcommand("generate", "sample toy events from the model");
  gen->add_option("--config", config_path, "model config (JSON)")->required();
  gen->add_option("--events", n_events, "number of events to generate");
  gen->add_option("--seed", seed, "random seed");
  gen->add_option("--out", out_path, "output data file (stdout when omitted)");

  auto* fit_cmd = app.add_subcommand("fit", "fit the model to a data file");
  fit_cmd->add_option("--config", config_path, "model config (JSON)")->required();
  fit_cmd->add_option("--data", data_path, "event data file")->required();
  fit_cmd->add_option("--backend", flags.backend, "serial|threads")
      ->check(CLI::IsMember({"serial", "threads"}));
  fit_cmd->add_option("--threads", flags.threads,
                      "worker count (overrides PARFIT_THREADS)");
  fit_cmd->add_option("--out", out_path, "report file (stdout when omitted)");

  auto* bench = app.add_subcommand("bench", "thread-scaling benchmark of the fit");
  bench->add_option("--config", config_path, "model config (JSON)")->required();
  bench->add_option("--data", data_path, "event data file")->required();
  bench->add_option("--threads", thread_counts, "thread counts (must include 1)")
      ->required()
      ->expected(-2);
  bench->add_option("--repetitions", repetitions, "repetitions per count (>= 3)");
  bench->add_option("--out", out_path, "report file (stdout when omitted)");

  auto* plot = app.add_subcommand("plotdata", "emit model/data curve columns");
  plot->add_option("--config", config_path, "model config (JSON)")->required();
  plot->add_option("--data", data_path, "event data file")->required();
  plot->add_option("--result", result_path, "fit report to take values from");
  plot->add_option("--points", points, "number of curve points");
  plot->add_option("--out", out_path, "curve file (stdout when omitted)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_generate(config_path, n_events, seed, out_path);
    if (fit_cmd->parsed()) return cmd_fit(config_path, data_path, flags, out_path);
    if (bench->parsed())
      return cmd_bench(config_path, data_path, thread_counts, repetitions, out_path);
    if (plot->parsed())
      return cmd_plotdata(config_path, data_path, result_path, points, out_path);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
