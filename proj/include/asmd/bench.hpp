#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "asmd/data_io.hpp"
#include "asmd/problem.hpp"
#include "asmd/solver.hpp"

namespace asmd {

class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double best_value)
      : std::runtime_error(what), best_value_(best_value) {}
  double best_value() const { return best_value_; }

 private:
  double best_value_;
};

struct ReferenceOptions {
  double tolerance = 1e-10;
  std::int64_t max_apg_iterations = 200000;
  double prox_epsilon = 0.0;  // used when the penalty has no exact prox
  /// Coordinate-descent polish; valid only when the smooth part is quadratic
  /// and the penalty is separable (l1 or none).
  bool cd_polish = true;
  std::int64_t max_cd_sweeps = 100000;
};

struct ReferenceResult {
  double value = 0.0;
  Vector point;
  std::int64_t apg_iterations = 0;
  std::int64_t cd_sweeps = 0;
};

/// High-accuracy optimum: accelerated proximal gradient until the
/// successive-objective change drops below the tolerance, then (optionally)
/// coordinate descent on the reconstructed quadratic. Throws
/// ConvergenceError with the best value when the budget runs out.
ReferenceResult reference_optimum(const FiniteSumProblem& problem,
                                  const ReferenceOptions& options,
                                  const Vector& x0);

/// Coordinate descent on a problem whose smooth part is quadratic, with an
/// l1 or zero penalty; the quadratic is probed through D+1 full gradients.
ReferenceResult coordinate_descent_reference(const FiniteSumProblem& problem,
                                             const Vector& x0, double tol,
                                             std::int64_t max_sweeps);

/// Least-squares slope of log(gap) against log(stage) over records with
/// first_stage <= stage <= last_stage. Needs at least five records with
/// positive gaps in the window.
double fit_rate(const SolverTrace& trace, std::int64_t first_stage,
                std::int64_t last_stage);

struct CsvOptions {
  /// Wall-clock milliseconds are zeroed unless enabled, keeping reruns of a
  /// seeded experiment byte-identical.
  bool timings = false;
};

/// Columns: stage_or_iter, grads_over_n, objective, gap, wall_ms, max_z_norm.
/// Gap is clamped below at 1e-16 when a reference is present and left empty
/// otherwise. Written atomically (temp file + rename).
void write_trace_csv(const SolverTrace& trace, const std::string& path,
                     const CsvOptions& options = {});

/// One CSV back into a trace (columns as written by write_trace_csv).
SolverTrace read_trace_csv(const std::string& path);

struct RunSpec {
  std::string label;
  std::map<std::string, std::string> keys;
};

struct ExperimentConfig {
  std::map<std::string, std::string> globals;
  std::vector<RunSpec> runs;
};

ExperimentConfig parse_experiment_config(const std::string& path);

struct ExperimentOptions {
  std::string out_dir = "out";
  int threads = 1;
  bool timings = false;
};

/// Runs every configured solver on the configured problem, one CSV per run
/// plus a manifest of all resolved parameters. Returns the written paths.
std::vector<std::string> run_experiment(const ExperimentConfig& config,
                                        const ExperimentOptions& options);

/// Resolves the dataset/penalty from the config and computes the reference
/// optimum the runs would use.
ReferenceResult compute_reference(const ExperimentConfig& config);

}  // namespace asmd
