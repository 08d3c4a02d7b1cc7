// Command-line experiment runner: configures solvers from a key/value
// config file, writes one trace CSV per run plus a manifest, and fits
// empirical convergence rates from recorded traces.

#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "asmd/bench.hpp"

namespace {

std::pair<std::int64_t, std::int64_t> parse_window(const std::string& w) {
  const auto colon = w.find(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == w.size())
    throw std::runtime_error("window must look like a:b");
  return {std::stoll(w.substr(0, colon)), std::stoll(w.substr(colon + 1))};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"composite-optimization benchmark runner"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  int threads = 1;
  bool timings = false;

  auto* run = app.add_subcommand("run", "run every solver in a config file");
  run->add_option("config", config_path, "experiment config file")->required();
  run->add_option("--out-dir", out_dir, "output directory for CSVs");
  run->add_option("--threads", threads, "parallelism across runs");
  run->add_flag("--timings", timings,
                "record wall-clock times in the CSVs (breaks byte-identical "
                "reruns)");

  auto* ref = app.add_subcommand(
      "reference", "compute the reference optimum for a config");
  ref->add_option("config", config_path, "experiment config file")->required();

  std::string trace_path;
  std::string window = "5:50";
  auto* rate = app.add_subcommand("rate", "fit a log-log rate from a trace");
  rate->add_option("trace", trace_path, "trace CSV")->required();
  rate->add_option("--window", window, "stage window a:b");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      const auto config = asmd::parse_experiment_config(config_path);
      asmd::ExperimentOptions options;
      options.out_dir = out_dir;
      options.threads = threads;
      options.timings = timings;
      const auto written = asmd::run_experiment(config, options);
      for (const auto& path : written) std::printf("%s\n", path.c_str());
    } else if (ref->parsed()) {
      const auto config = asmd::parse_experiment_config(config_path);
      const auto result = asmd::compute_reference(config);
      std::printf("%.17g\n", result.value);
    } else if (rate->parsed()) {
      const auto [a, b] = parse_window(window);
      const auto trace = asmd::read_trace_csv(trace_path);
      std::printf("%.17g\n", asmd::fit_rate(trace, a, b));
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
