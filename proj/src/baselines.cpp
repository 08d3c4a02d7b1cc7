#include "asmd/baselines.hpp"

#include <chrono>
#include <cmath>

#include "asmd/bregman.hpp"
#include "asmd/prox.hpp"
#include "asmd/rng.hpp"

namespace asmd {
namespace {

struct TraceBuilder {
  const FiniteSumProblem& problem;
  std::optional<double> reference;
  std::uint64_t grad_base;
  std::chrono::steady_clock::time_point t0;
  SolverTrace trace;

  TraceBuilder(const FiniteSumProblem& p, std::optional<double> ref)
      : problem(p), reference(ref), grad_base(p.gradient_evaluations()),
        t0(std::chrono::steady_clock::now()) {
    trace.components = static_cast<std::int64_t>(p.num_components());
  }

  void record(std::int64_t iter, const Vector& at, double iterate_norm) {
    TraceRecord r;
    r.stage = iter;
    r.gradient_evals = static_cast<std::int64_t>(
        problem.gradient_evaluations() - grad_base);
    r.objective = objective_value(problem, at);
    if (reference) r.gap = r.objective - *reference;
    r.wall_ms = std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - t0)
                    .count();
    r.max_z_norm = iterate_norm;
    trace.records.push_back(std::move(r));
  }
};

std::unique_ptr<ProxOracle> full_space_oracle(const FiniteSumProblem& problem,
                                              double prox_epsilon) {
  if (!problem.regularizer().has_exact_prox() && prox_epsilon <= 0.0)
    throw std::invalid_argument(
        "this penalty has no exact prox; set a positive prox tolerance");
  static const EuclideanGenerator euclid;
  return make_prox_oracle(euclid, problem.regularizer(),
                          ConstraintSet::full_space());
}

double default_step(const FiniteSumProblem& problem) {
  double l_avg = 0.0;
  for (std::size_t i = 0; i < problem.num_components(); ++i)
    l_avg += problem.component(i).lipschitz();
  l_avg /= static_cast<double>(problem.num_components());
  if (l_avg <= 0.0)
    throw std::invalid_argument("cannot derive a step size from L_A = 0");
  return 1.0 / l_avg;
}

}  // namespace

SolverTrace run_pgd(const FiniteSumProblem& problem, const PgdOptions& options,
                    const Vector& x0) {
  auto oracle = full_space_oracle(problem, options.prox_epsilon);
  const double gamma =
      options.step_size > 0.0 ? options.step_size : default_step(problem);
  TraceBuilder tb(problem, options.reference_value);
  Vector x = x0, g;
  double max_norm = norm(x);
  tb.record(0, x, max_norm);
  for (std::int64_t k = 1; k <= options.steps; ++k) {
    full_gradient(problem, x, g);
    x = oracle->solve(g, 1.0 / gamma, x, options.prox_epsilon).point;
    max_norm = std::max(max_norm, norm(x));
    tb.record(k, x, max_norm);
  }
  tb.trace.final_point = std::move(x);
  return tb.trace;
}

SolverTrace run_spgd(const FiniteSumProblem& problem,
                     const SpgdOptions& options, const Vector& x0) {
  auto oracle = full_space_oracle(problem, 0.0);
  const double gamma0 =
      options.gamma0 > 0.0 ? options.gamma0 : default_step(problem);
  const std::size_t n = problem.num_components();
  const std::int64_t every =
      options.record_every > 0 ? options.record_every
                               : static_cast<std::int64_t>(n);
  SplitMix64 rng(options.seed);
  TraceBuilder tb(problem, options.reference_value);

  Vector x = x0, g, avg = x0;
  double max_norm = norm(x);
  tb.record(0, avg, max_norm);
  for (std::int64_t k = 1; k <= options.steps; ++k) {
    const std::size_t i =
        static_cast<std::size_t>(rng.next_below(static_cast<std::uint64_t>(n)));
    problem.component_gradient(i, x, g);
    const double gamma = gamma0 / std::sqrt(static_cast<double>(k));
    x = oracle->solve(g, 1.0 / gamma, x, 0.0).point;
    // Running average: avg_k = avg_{k-1} + (x_k - avg_{k-1}) / k.
    for (std::size_t j = 0; j < avg.size(); ++j)
      avg[j] += (x[j] - avg[j]) / static_cast<double>(k);
    max_norm = std::max(max_norm, norm(x));
    if (k % every == 0) tb.record(k, avg, max_norm);
  }
  if (options.steps % every != 0) tb.record(options.steps, avg, max_norm);
  tb.trace.final_point = std::move(avg);
  return tb.trace;
}

SolverTrace run_fista(const FiniteSumProblem& problem,
                      const AccelOptions& options, const Vector& x0) {
  auto oracle = full_space_oracle(problem, options.prox_epsilon);
  const double l = 1.0 / (default_step(problem) * options.step_scale);
  TraceBuilder tb(problem, options.reference_value);

  Vector x_prev = x0, y = x0, g, x;
  double t = 1.0;
  double max_norm = norm(x0);
  tb.record(0, x_prev, max_norm);
  for (std::int64_t k = 1; k <= options.steps; ++k) {
    full_gradient(problem, y, g);
    x = oracle->solve(g, l, y, options.prox_epsilon).point;
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    y.resize(x.size());
    for (std::size_t j = 0; j < x.size(); ++j)
      y[j] = x[j] + ((t - 1.0) / t_next) * (x[j] - x_prev[j]);
    t = t_next;
    x_prev = x;
    max_norm = std::max(max_norm, norm(x));
    tb.record(k, x, max_norm);
  }
  tb.trace.final_point = std::move(x_prev);
  return tb.trace;
}

SolverTrace run_apg(const FiniteSumProblem& problem,
                    const AccelOptions& options, const Vector& x0) {
  auto oracle = full_space_oracle(problem, options.prox_epsilon);
  const double l = 1.0 / (default_step(problem) * options.step_scale);
  TraceBuilder tb(problem, options.reference_value);

  Vector x = x0, z = x0, y(x0.size()), g;
  double max_norm = norm(x0);
  tb.record(0, x, max_norm);
  for (std::int64_t k = 0; k < options.steps; ++k) {
    const double theta = 2.0 / (static_cast<double>(k) + 2.0);
    for (std::size_t j = 0; j < x.size(); ++j)
      y[j] = (1.0 - theta) * x[j] + theta * z[j];
    full_gradient(problem, y, g);
    z = oracle->solve(g, theta * l, z, options.prox_epsilon).point;
    for (std::size_t j = 0; j < x.size(); ++j)
      x[j] = (1.0 - theta) * x[j] + theta * z[j];
    max_norm = std::max(max_norm, norm(z));
    tb.record(k + 1, x, max_norm);
  }
  tb.trace.final_point = std::move(x);
  return tb.trace;
}

}  // namespace asmd
