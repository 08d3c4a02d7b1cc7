#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>

#include "asmd/problem.hpp"
#include "asmd/smoothing.hpp"
#include "asmd/solver.hpp"

namespace asmd {

/// min_{x in X} (1/n) sum_i max_{z_i in Z_i} g_i(x, z_i), handled through the
/// smoothed surrogates held by the components.
struct SaddleProblem {
  std::vector<std::shared_ptr<const SmoothedMax>> components;
  ConstraintSet constraint;
  double mu = 0.0;
};

struct SaddleConfig {
  std::int64_t inner_steps = 1;  // m
  std::int64_t stages = 1;       // S
  std::uint64_t seed = 0;
  Sampling sampling = Sampling::Uniform;
  std::vector<double> custom_weights;
  /// f* of the smoothed objective, for the gap column.
  std::optional<double> reference_value;
  std::function<void(std::int64_t, const Vector&)> stage_observer;
};

struct SaddleTrace : SolverTrace {
  /// (1/n) sum_i max_z g_i at each recorded stage.
  std::vector<double> original_objective;
};

/// Specialized run with the Euclidean distance and the fixed schedule
/// alpha2(s) = 2/(s+2), alpha3 = 1/3. The u-update is the closed-form
/// Euclidean prox with theta = alpha2 * l_bar; when X is not the full space
/// it is followed by a Euclidean projection onto X. With X equal to the full
/// space the iterates coincide, bit for bit, with the general engine run on
/// the adapted finite-sum problem.
SaddleTrace run_saddle(const SaddleProblem& problem, const SaddleConfig& config,
                       const Vector& x0);

/// Adapts the saddle problem to a finite-sum problem over the smoothed
/// components with P == 0 (used for cross-validation and references).
FiniteSumProblem make_smoothed_finite_sum(const SaddleProblem& problem);

}  // namespace asmd
