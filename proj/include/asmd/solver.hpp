#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>

#include "asmd/bregman.hpp"
#include "asmd/problem.hpp"
#include "asmd/prox.hpp"
#include "asmd/rng.hpp"
#include "asmd/vec.hpp"

namespace asmd {

struct Alphas {
  double a1, a2, a3;
};

/// Interpolation schedule: alpha2(s) = 2/(s + nu), alpha3 fixed,
/// alpha1(s) = 1 - alpha3 - alpha2(s). Valid for nu >= 2 and
/// 0 < alpha3 <= (nu - 1)/(nu + 1), which keeps every weight in [0, 1]
/// from stage 1 on.
class AlphaSchedule {
 public:
  AlphaSchedule() : AlphaSchedule(2.0, 1.0 / 3.0) {}
  AlphaSchedule(double nu, double alpha3);

  Alphas at(std::int64_t s) const;
  double nu() const { return nu_; }
  double alpha3() const { return alpha3_; }

 private:
  double nu_;
  double alpha3_;
};

Alphas alpha_at(const AlphaSchedule& schedule, std::int64_t s);

/// Per-stage prox tolerance.
struct EpsilonSchedule {
  enum class Kind { Exact, Fixed, Power };

  Kind kind = Kind::Exact;
  double eps0 = 0.0;
  double power = 0.0;  // eps_s = eps0 / s^power

  static EpsilonSchedule exact() { return {}; }
  static EpsilonSchedule fixed(double eps0);
  static EpsilonSchedule decaying(double eps0, double p);

  double at(std::int64_t s) const;
  /// True when sum_s sqrt(eps_s * (s + nu)) converges, the hypothesis of the
  /// inexact rate guarantee; holds for the exact schedule and for power
  /// decay faster than 1/s^3.
  bool summable() const;
};

struct AsmdConfig {
  enum class Variant { I, II, Blend };
  enum class XTildeRule { Average, Best };

  std::int64_t inner_steps = 1;  // m
  std::int64_t stages = 1;       // S
  std::uint64_t seed = 0;

  Sampling sampling = Sampling::Uniform;
  std::vector<double> custom_weights;

  AlphaSchedule schedule;
  EpsilonSchedule epsilon;

  Variant variant = Variant::I;
  double blend_lambda = 0.5;  // weight on the second-prox point

  XTildeRule xtilde_rule = XTildeRule::Average;

  ConstraintSet constraint;  // X_s, fixed across stages
  std::shared_ptr<const DistanceGenerator> generator;  // Euclidean if null

  /// When set, every inner step verifies the x-update inequality
  ///   <v,x> + (L/2)||x-y||^2 + P(x) <= same at x-hat (+ prox slack)
  /// and throws std::logic_error on violation. Costs extra objective
  /// evaluations; leave off for benchmark runs.
  bool check_inequalities = false;

  std::optional<double> reference_value;  // f* for the gap column

  /// Called with (stage, x_tilde) after each stage record, stage 0 included.
  std::function<void(std::int64_t, const Vector&)> stage_observer;
};

struct TraceRecord {
  std::int64_t stage = 0;           // stage (or iteration, for baselines)
  std::int64_t gradient_evals = 0;  // cumulative component-gradient count
  double objective = 0.0;
  std::optional<double> gap;
  double wall_ms = 0.0;
  double max_z_norm = 0.0;  // largest ||z|| seen so far
};

struct SolverTrace {
  std::vector<TraceRecord> records;
  Vector final_point;
  std::int64_t components = 0;  // n, for plotting against grads/n
  /// False when a positive prox tolerance is paired with an unsmooth
  /// generator or a non-summable tolerance schedule.
  bool inexact_rate_hypotheses_met = true;

  const TraceRecord& back() const { return records.back(); }
};

/// Variance-reduced estimator v = vtilde + (grad f_i(y) - grad f_i(xt)) / (q_i n).
/// Unbiased over i ~ q when vtilde is the full gradient at xt. Counts two
/// gradient evaluations.
Vector reduced_gradient(const FiniteSumProblem& problem, const Vector& y,
                        const Vector& xtilde, const Vector& vtilde,
                        std::size_t i, const std::vector<double>& q);

/// Mutable state threaded through the stochastic inner steps of one stage.
struct AsmdInnerState {
  Vector x;       // x_{k-1,s}
  Vector z;       // z_{k-1,s}
  Vector xtilde;  // snapshot of the previous stage
  Vector vtilde;  // full gradient at the snapshot
};

struct AsmdStepScratch {
  Vector y, grad_y, grad_snap, v, xhat;
};

/// One inner step: interpolate y, form the variance-reduced gradient for the
/// given component, take the prox step with theta = alpha2 * l_bar and
/// tolerance eps, then pick x by the configured variant. Updates state.x and
/// state.z. Returns the certified prox gap (0 for exact oracles).
double asmd_inner_step(const FiniteSumProblem& problem,
                       const AsmdConfig& config, const ProxOracle& oracle,
                       double l_bar, const std::vector<double>& q,
                       std::int64_t s, std::size_t component,
                       AsmdInnerState& state, AsmdStepScratch& scratch);

SolverTrace run_asmd(const FiniteSumProblem& problem, const AsmdConfig& config,
                     const Vector& x0);
SolverTrace run_asmd(const FiniteSumProblem& problem, const AsmdConfig& config,
                     const Vector& xtilde0, const Vector& xm0,
                     const Vector& z0);

}  // namespace asmd
