#pragma once

#include <cstdint>
#include <optional>

#include "asmd/problem.hpp"
#include "asmd/solver.hpp"

namespace asmd {

// Deterministic and stochastic first-order baselines. All of them share the
// gradient accounting of the stochastic engine (n per full gradient, 1 per
// component gradient), so traces are comparable on the grads/n axis.

struct PgdOptions {
  std::int64_t steps = 100;
  double step_size = 0.0;  // 0: use 1/L_A
  double prox_epsilon = 0.0;  // 0 requires an exact prox
  std::optional<double> reference_value;
};

struct SpgdOptions {
  std::int64_t steps = 1000;  // component-gradient steps
  double gamma0 = 0.0;        // 0: use 1/L_A; step k uses gamma0/sqrt(k)
  std::uint64_t seed = 0;
  std::int64_t record_every = 0;  // 0: every n steps
  std::optional<double> reference_value;
};

struct AccelOptions {
  std::int64_t steps = 100;
  double step_scale = 1.0;    // multiplies 1/L_A
  double prox_epsilon = 0.0;  // 0 requires an exact prox
  std::optional<double> reference_value;
};

/// Proximal gradient descent with constant step 1/L_A.
SolverTrace run_pgd(const FiniteSumProblem& problem, const PgdOptions& options,
                    const Vector& x0);

/// Stochastic proximal gradient with uniform sampling and decreasing step
/// gamma0/sqrt(k); the trace follows the running average of the iterates.
SolverTrace run_spgd(const FiniteSumProblem& problem,
                     const SpgdOptions& options, const Vector& x0);

/// FISTA: momentum sequence t_{k+1} = (1 + sqrt(1 + 4 t_k^2)) / 2, step 1/L_A.
SolverTrace run_fista(const FiniteSumProblem& problem,
                      const AccelOptions& options, const Vector& x0);

/// Three-sequence accelerated proximal gradient with theta_k = 2/(k+2); the
/// first step (theta = 1) reduces to a plain prox-gradient step.
SolverTrace run_apg(const FiniteSumProblem& problem,
                    const AccelOptions& options, const Vector& x0);

}  // namespace asmd
