#include "asmd/solver.hpp"

#include <chrono>
#include <cmath>

namespace asmd {

AlphaSchedule::AlphaSchedule(double nu, double alpha3)
    : nu_(nu), alpha3_(alpha3) {
  if (nu < 2.0) throw std::invalid_argument("schedule needs nu >= 2");
  if (alpha3 <= 0.0 || alpha3 > (nu - 1.0) / (nu + 1.0))
    throw std::invalid_argument(
        "schedule needs 0 < alpha3 <= (nu-1)/(nu+1)");
}

Alphas AlphaSchedule::at(std::int64_t s) const {
  if (s < 1) throw std::invalid_argument("stage index starts at 1");
  const double a2 = 2.0 / (static_cast<double>(s) + nu_);
  double a1 = 1.0 - alpha3_ - a2;
  // At the boundary stage the first weight is exactly zero in real
  // arithmetic; snap the roundoff residue so iterates provably ignore x.
  if (std::fabs(a1) < 1e-15) a1 = 0.0;
  return {a1, a2, alpha3_};
}

Alphas alpha_at(const AlphaSchedule& schedule, std::int64_t s) {
  return schedule.at(s);
}

EpsilonSchedule EpsilonSchedule::fixed(double eps0) {
  if (eps0 <= 0.0) throw std::invalid_argument("fixed tolerance must be > 0");
  return {Kind::Fixed, eps0, 0.0};
}

EpsilonSchedule EpsilonSchedule::decaying(double eps0, double p) {
  if (eps0 <= 0.0 || p <= 0.0)
    throw std::invalid_argument("power schedule needs eps0 > 0 and p > 0");
  return {Kind::Power, eps0, p};
}

double EpsilonSchedule::at(std::int64_t s) const {
  switch (kind) {
    case Kind::Exact:
      return 0.0;
    case Kind::Fixed:
      return eps0;
    case Kind::Power:
      return eps0 / std::pow(static_cast<double>(s), power);
  }
  return 0.0;
}

bool EpsilonSchedule::summable() const {
  return kind == Kind::Exact || (kind == Kind::Power && power > 3.0);
}

Vector reduced_gradient(const FiniteSumProblem& problem, const Vector& y,
                        const Vector& xtilde, const Vector& vtilde,
                        std::size_t i, const std::vector<double>& q) {
  Vector gy, gs;
  problem.component_gradient(i, y, gy);
  problem.component_gradient(i, xtilde, gs);
  const double w =
      1.0 / (q[i] * static_cast<double>(problem.num_components()));
  Vector v(y.size());
  kernels::diff_axpy(v.data(), vtilde.data(), gy.data(), gs.data(), w,
                     v.size());
  return v;
}

namespace {

double x_update_objective(const FiniteSumProblem& problem, const Vector& v,
                          double l_bar, const Vector& y, const Vector& u) {
  double sq = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    const double d = u[j] - y[j];
    sq += d * d;
  }
  return dot(v, u) + 0.5 * l_bar * sq + problem.regularizer().value(u);
}

}  // namespace

double asmd_inner_step(const FiniteSumProblem& problem,
                       const AsmdConfig& config, const ProxOracle& oracle,
                       double l_bar, const std::vector<double>& q,
                       std::int64_t s, std::size_t component,
                       AsmdInnerState& state, AsmdStepScratch& scratch) {
  const std::size_t d = state.x.size();
  const Alphas a = config.schedule.at(s);
  const double theta = a.a2 * l_bar;
  const double eps = config.epsilon.at(s);

  scratch.y.resize(d);
  kernels::combine3(scratch.y.data(), a.a1, state.x.data(), a.a2,
                    state.z.data(), a.a3, state.xtilde.data(), d);

  problem.component_gradient(component, scratch.y, scratch.grad_y);
  problem.component_gradient(component, state.xtilde, scratch.grad_snap);
  const double w = 1.0 / (q[component] *
                          static_cast<double>(problem.num_components()));
  scratch.v.resize(d);
  kernels::diff_axpy(scratch.v.data(), state.vtilde.data(),
                     scratch.grad_y.data(), scratch.grad_snap.data(), w, d);

  ProxResult zres = oracle.solve(scratch.v, theta, state.z, eps);
  scratch.xhat.resize(d);
  kernels::combine3(scratch.xhat.data(), a.a1, state.x.data(), a.a2,
                    zres.point.data(), a.a3, state.xtilde.data(), d);

  double x_gap = 0.0;
  Vector xnew;
  switch (config.variant) {
    case AsmdConfig::Variant::I:
      xnew = scratch.xhat;
      break;
    case AsmdConfig::Variant::II: {
      ProxResult xres = oracle.solve(scratch.v, l_bar, scratch.y, eps);
      x_gap = xres.certified_gap;
      xnew = std::move(xres.point);
      break;
    }
    case AsmdConfig::Variant::Blend: {
      ProxResult xres = oracle.solve(scratch.v, l_bar, scratch.y, eps);
      x_gap = xres.certified_gap;
      const double lam = config.blend_lambda;
      xnew.resize(d);
      for (std::size_t j = 0; j < d; ++j)
        xnew[j] = lam * xres.point[j] + (1.0 - lam) * scratch.xhat[j];
      break;
    }
  }

  if (config.check_inequalities) {
    const double lhs = x_update_objective(problem, scratch.v, l_bar,
                                          scratch.y, xnew);
    const double rhs = x_update_objective(problem, scratch.v, l_bar,
                                          scratch.y, scratch.xhat);
    double tol = 1e-9 * (1.0 + std::fabs(rhs)) + x_gap;
    if (!problem.regularizer().has_exact_prox()) tol += 1e-7;
    if (lhs > rhs + tol)
      throw std::logic_error("x-update inequality violated: inner step bug");
  }

  state.x = std::move(xnew);
  state.z = std::move(zres.point);
  return zres.certified_gap;
}

namespace {

void check_initial_point(const FiniteSumProblem& problem,
                         const AsmdConfig& config, const Vector& p,
                         const char* name) {
  if (p.size() != problem.dimension())
    throw std::invalid_argument(std::string(name) + ": dimension mismatch");
  if (!problem.regularizer().in_domain(p))
    throw std::invalid_argument(std::string(name) + " outside dom(P)");
  if (!config.constraint.contains(p))
    throw std::invalid_argument(std::string(name) + " outside X");
}

}  // namespace

SolverTrace run_asmd(const FiniteSumProblem& problem, const AsmdConfig& config,
                     const Vector& x0) {
  return run_asmd(problem, config, x0, x0, x0);
}

SolverTrace run_asmd(const FiniteSumProblem& problem, const AsmdConfig& config,
                     const Vector& xtilde0, const Vector& xm0,
                     const Vector& z0) {
  if (config.inner_steps < 1)
    throw std::invalid_argument("need at least one inner step per stage");
  if (config.stages < 0) throw std::invalid_argument("negative stage count");
  if (config.blend_lambda < 0.0 || config.blend_lambda > 1.0)
    throw std::invalid_argument("blend weight must lie in [0, 1]");
  check_initial_point(problem, config, xtilde0, "xtilde0");
  check_initial_point(problem, config, xm0, "x0");
  check_initial_point(problem, config, z0, "z0");

  const std::size_t d = problem.dimension();
  const std::size_t n = problem.num_components();
  const std::shared_ptr<const DistanceGenerator> generator =
      config.generator ? config.generator
                       : std::make_shared<EuclideanGenerator>();
  const std::vector<double> q =
      make_sampling_weights(problem, config.sampling, config.custom_weights);
  const DiscreteSampler sampler(q);
  const LipschitzSummary lip =
      lipschitz_summary(problem, q, config.schedule.alpha3());
  const auto oracle =
      make_prox_oracle(*generator, problem.regularizer(), config.constraint);

  SolverTrace trace;
  trace.components = static_cast<std::int64_t>(n);
  trace.inexact_rate_hypotheses_met =
      config.epsilon.kind == EpsilonSchedule::Kind::Exact ||
      (generator->smoothness().has_value() && config.epsilon.summable());

  SplitMix64 rng(config.seed);
  AsmdInnerState state;
  state.xtilde = xtilde0;
  state.x = xm0;
  state.z = z0;
  AsmdStepScratch scratch;

  const std::uint64_t grad_base = problem.gradient_evaluations();
  const auto t0 = std::chrono::steady_clock::now();
  double max_z = norm(state.z);

  auto record = [&](std::int64_t stage) {
    TraceRecord r;
    r.stage = stage;
    r.gradient_evals =
        static_cast<std::int64_t>(problem.gradient_evaluations() - grad_base);
    r.objective = objective_value(problem, state.xtilde);
    if (config.reference_value)
      r.gap = r.objective - *config.reference_value;
    r.wall_ms = std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - t0)
                    .count();
    r.max_z_norm = max_z;
    trace.records.push_back(std::move(r));
    if (config.stage_observer) config.stage_observer(stage, state.xtilde);
  };

  record(0);

  Vector xsum(d), best_x;
  for (std::int64_t s = 1; s <= config.stages; ++s) {
    full_gradient(problem, state.xtilde, state.vtilde);

    std::fill(xsum.begin(), xsum.end(), 0.0);
    double best_val = kInfinity;
    for (std::int64_t k = 1; k <= config.inner_steps; ++k) {
      const std::size_t i = sampler.sample(rng);
      asmd_inner_step(problem, config, *oracle, lip.l_bar, q, s, i, state,
                      scratch);
      max_z = std::max(max_z, norm(state.z));
      if (config.xtilde_rule == AsmdConfig::XTildeRule::Average) {
        kernels::add_inplace(xsum.data(), state.x.data(), d);
      } else {
        const double val = objective_value(problem, state.x);
        if (val < best_val) {
          best_val = val;
          best_x = state.x;
        }
      }
    }
    if (config.xtilde_rule == AsmdConfig::XTildeRule::Average) {
      kernels::div_scalar(xsum.data(), static_cast<double>(config.inner_steps),
                          d);
      state.xtilde = xsum;
    } else {
      state.xtilde = best_x;
    }
    record(s);
  }

  trace.final_point = state.xtilde;
  return trace;
}

}  // namespace asmd
