#include "asmd/ccsaddle.hpp"

#include <chrono>
#include <cmath>

#include "asmd/rng.hpp"

namespace asmd {
namespace {

std::vector<double> saddle_weights(const SaddleProblem& problem,
                                   const SaddleConfig& config) {
  const std::size_t n = problem.components.size();
  switch (config.sampling) {
    case Sampling::Uniform:
      return std::vector<double>(n, 1.0 / static_cast<double>(n));
    case Sampling::LipschitzProportional: {
      std::vector<double> q(n);
      double total = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        q[i] = smoothed_lipschitz(*problem.components[i]);
        total += q[i];
      }
      for (double& v : q) v /= total;
      return q;
    }
    case Sampling::Custom:
      if (config.custom_weights.size() != n)
        throw std::invalid_argument("custom sampling vector length != n");
      return config.custom_weights;
  }
  throw std::invalid_argument("unknown sampling kind");
}

}  // namespace

FiniteSumProblem make_smoothed_finite_sum(const SaddleProblem& problem) {
  std::vector<std::shared_ptr<const Component>> components;
  components.reserve(problem.components.size());
  for (const auto& sm : problem.components)
    components.push_back(std::make_shared<SmoothedMaxComponent>(sm));
  const std::size_t d = problem.components.front()->dimension();
  return FiniteSumProblem(std::move(components),
                          std::make_shared<ZeroRegularizer>(), d);
}

SaddleTrace run_saddle(const SaddleProblem& problem, const SaddleConfig& config,
                       const Vector& x0) {
  if (problem.components.empty())
    throw std::invalid_argument("saddle problem needs at least one component");
  if (config.inner_steps < 1)
    throw std::invalid_argument("need at least one inner step per stage");
  const std::size_t n = problem.components.size();
  const std::size_t d = problem.components.front()->dimension();
  for (const auto& c : problem.components)
    if (c->dimension() != d)
      throw std::invalid_argument("saddle components disagree on dimension");
  if (x0.size() != d) throw std::invalid_argument("x0 dimension mismatch");
  if (!problem.constraint.contains(x0))
    throw std::invalid_argument("x0 outside X");
  const bool project =
      problem.constraint.kind != ConstraintSet::Kind::FullSpace;

  // Fixed schedule: alpha2 = 2/(s+2), alpha3 = 1/3.
  const AlphaSchedule schedule(2.0, 1.0 / 3.0);
  const std::vector<double> q = saddle_weights(problem, config);
  const DiscreteSampler sampler(q);

  double l_avg = 0.0, l_weighted = 0.0;
  const double dn = static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double li = smoothed_lipschitz(*problem.components[i]);
    l_avg += li;
    l_weighted = std::max(l_weighted, li / (q[i] * dn));
  }
  l_avg /= dn;
  const double l_bar = l_avg + l_weighted / schedule.alpha3();

  SplitMix64 rng(config.seed);
  Vector xtilde = x0, x = x0, u = x0;
  Vector y(d), v(d), unew(d), xnew(d), xsum(d), vtilde(d), proj_buf;
  std::int64_t grads = 0;
  double max_u = norm(u);

  SaddleTrace trace;
  trace.components = static_cast<std::int64_t>(n);
  const auto t0 = std::chrono::steady_clock::now();

  auto smoothed_objective = [&](const Vector& at) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      acc += problem.components[i]->value_grad(at).value;
    return acc / dn;
  };
  auto original_objective = [&](const Vector& at) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      acc += problem.components[i]->max_value(at);
    return acc / dn;
  };

  auto record = [&](std::int64_t stage) {
    TraceRecord r;
    r.stage = stage;
    r.gradient_evals = grads;
    r.objective = smoothed_objective(xtilde);
    if (config.reference_value) r.gap = r.objective - *config.reference_value;
    r.wall_ms = std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - t0)
                    .count();
    r.max_z_norm = max_u;
    trace.records.push_back(std::move(r));
    trace.original_objective.push_back(original_objective(xtilde));
    if (config.stage_observer) config.stage_observer(stage, xtilde);
  };

  record(0);

  for (std::int64_t s = 1; s <= config.stages; ++s) {
    const Alphas a = schedule.at(s);
    const double theta = a.a2 * l_bar;
    // l_bar == 0 only when every coupling ignores x; the gradients are then
    // identically zero and the u-update degenerates to a no-op.
    const double step_scale = theta > 0.0 ? -1.0 / theta : 0.0;

    // Full pass over the smoothed gradients at the snapshot, accumulated in
    // ascending order exactly like the finite-sum engine.
    std::fill(vtilde.begin(), vtilde.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto eval = problem.components[i]->value_grad(xtilde);
      kernels::add_inplace(vtilde.data(), eval.gradient.data(), d);
    }
    kernels::div_scalar(vtilde.data(), dn, d);
    grads += static_cast<std::int64_t>(n);

    std::fill(xsum.begin(), xsum.end(), 0.0);
    for (std::int64_t k = 1; k <= config.inner_steps; ++k) {
      const std::size_t i = sampler.sample(rng);
      kernels::combine3(y.data(), a.a1, x.data(), a.a2, u.data(), a.a3,
                        xtilde.data(), d);
      const auto grad_y = problem.components[i]->value_grad(y);
      const auto grad_snap = problem.components[i]->value_grad(xtilde);
      grads += 2;
      const double w = 1.0 / (q[i] * dn);
      kernels::diff_axpy(v.data(), vtilde.data(), grad_y.gradient.data(),
                         grad_snap.gradient.data(), w, d);
      kernels::step(unew.data(), u.data(), v.data(), step_scale, d);
      if (project) {
        problem.constraint.project(unew, proj_buf);
        unew = proj_buf;
      }
      kernels::combine3(xnew.data(), a.a1, x.data(), a.a2, unew.data(), a.a3,
                        xtilde.data(), d);
      x = xnew;
      u = unew;
      max_u = std::max(max_u, norm(u));
      kernels::add_inplace(xsum.data(), x.data(), d);
    }
    kernels::div_scalar(xsum.data(), static_cast<double>(config.inner_steps),
                        d);
    xtilde = xsum;
    record(s);
  }

  trace.final_point = xtilde;
  return trace;
}

}  // namespace asmd
