#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "asmd/data_io.hpp"
#include "asmd/solver.hpp"

using namespace asmd;

namespace {

Vector random_vec(SplitMix64& rng, std::size_t d, double scale) {
  Vector v(d);
  for (double& x : v) x = rng.uniform(-scale, scale);
  return v;
}

struct LassoFixture {
  std::vector<Vector> rows;
  std::vector<double> labels;
  std::vector<std::shared_ptr<const Component>> comps;

  FiniteSumProblem make(double lambda) {
    comps.clear();
    for (std::size_t i = 0; i < rows.size(); ++i)
      comps.push_back(std::make_shared<SquaredLossComponent>(
          rows[i].data(), rows[i].size(), labels[i]));
    std::shared_ptr<const Regularizer> reg;
    if (lambda == 0.0) reg = std::make_shared<ZeroRegularizer>();
    else reg = std::make_shared<L1Regularizer>(lambda);
    return FiniteSumProblem(comps, std::move(reg), rows.front().size());
  }
};

LassoFixture seeded_fixture(std::uint64_t seed, std::size_t n, std::size_t d) {
  SplitMix64 rng(seed);
  LassoFixture f;
  for (std::size_t i = 0; i < n; ++i) {
    f.rows.push_back(random_vec(rng, d, 2.0));
    f.labels.push_back(rng.uniform(-1.0, 1.0));
  }
  return f;
}

}  // namespace

TEST_CASE("alpha schedule closed forms") {
  const AlphaSchedule s13(2.0, 1.0 / 3.0);
  auto a = s13.at(1);
  CHECK(a.a1 == 0.0);
  CHECK(a.a2 == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(a.a3 == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  a = s13.at(2);
  CHECK(a.a1 == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
  CHECK(a.a2 == doctest::Approx(0.5).epsilon(1e-15));

  const AlphaSchedule s23(5.0, 2.0 / 3.0);
  a = s23.at(1);
  CHECK(a.a1 == 0.0);
  CHECK(a.a2 == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(a.a3 == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("alpha schedule rejects invalid parameters") {
  CHECK_THROWS_AS(AlphaSchedule(1.5, 0.2), std::invalid_argument);
  CHECK_THROWS_AS(AlphaSchedule(2.0, 2.0 / 3.0), std::invalid_argument);
  CHECK_THROWS_AS(AlphaSchedule(2.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(AlphaSchedule(2.0, 1.0 / 3.0).at(0), std::invalid_argument);
}

TEST_CASE("alpha schedule satisfies the three update conditions") {
  const struct {
    double nu, a3;
  } combos[] = {{2.0, 1.0 / 3.0}, {5.0, 1.0 / 3.0}, {5.0, 2.0 / 3.0}};
  for (const auto& c : combos) {
    const AlphaSchedule sched(c.nu, c.a3);
    for (std::int64_t s = 1; s <= 10000; ++s) {
      const Alphas a = sched.at(s);
      const Alphas next = sched.at(s + 1);
      CHECK(a.a1 >= 0.0);
      CHECK(a.a1 <= 1.0);
      CHECK(a.a2 >= 0.0);
      CHECK(a.a2 <= 1.0);
      CHECK(a.a1 + a.a2 + a.a3 == doctest::Approx(1.0).epsilon(1e-12));
      const double c1 =
          (1.0 - a.a1) / (a.a2 * a.a2) - a.a3 / (next.a2 * next.a2);
      CHECK(c1 >= -1e-12);
      const double c2 =
          1.0 / (a.a2 * a.a2) - (1.0 - next.a2) / (next.a2 * next.a2);
      CHECK(c2 >= -1e-12);
    }
  }
}

TEST_CASE("epsilon schedules") {
  CHECK(EpsilonSchedule::exact().at(7) == 0.0);
  CHECK(EpsilonSchedule::exact().summable());
  CHECK(EpsilonSchedule::fixed(1e-3).at(10) == 1e-3);
  CHECK(!EpsilonSchedule::fixed(1e-3).summable());
  const auto pow4 = EpsilonSchedule::decaying(1e-3, 4.0);
  CHECK(pow4.at(2) == doctest::Approx(1e-3 / 16.0));
  CHECK(pow4.summable());
  CHECK(!EpsilonSchedule::decaying(1e-3, 2.0).summable());
  CHECK_THROWS_AS(EpsilonSchedule::fixed(0.0), std::invalid_argument);
}

TEST_CASE("reduced gradient degenerate cases") {
  auto fixture = seeded_fixture(5, 3, 4);
  auto problem = fixture.make(0.1);
  const auto q = make_sampling_weights(problem, Sampling::Uniform);
  SplitMix64 rng(6);
  const Vector xt = random_vec(rng, 4, 1.0);
  const Vector vt = full_gradient(problem, xt);

  // y == snapshot: the correction vanishes for every component.
  for (std::size_t i = 0; i < 3; ++i) {
    const Vector v = reduced_gradient(problem, xt, xt, vt, i, q);
    for (std::size_t j = 0; j < 4; ++j) CHECK(v[j] == vt[j]);
  }

  // Single component: the estimator is the plain gradient at y.
  auto single = seeded_fixture(9, 1, 4);
  auto sp = single.make(0.0);
  const Vector sxt = random_vec(rng, 4, 1.0);
  const Vector svt = full_gradient(sp, sxt);
  const Vector y = random_vec(rng, 4, 1.0);
  const Vector v1 = reduced_gradient(sp, y, sxt, svt, 0, {1.0});
  Vector expect;
  sp.component_gradient(0, y, expect);
  for (std::size_t j = 0; j < 4; ++j)
    CHECK(v1[j] == doctest::Approx(expect[j]).epsilon(1e-15));
}

TEST_CASE("estimator is unbiased and satisfies the variance bound") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto fixture = seeded_fixture(seed, 4 + seed % 3, 5);
    auto problem = fixture.make(0.0);
    const std::size_t n = problem.num_components();
    SplitMix64 rng(seed * 77);
    const Vector y = random_vec(rng, 5, 1.5);
    const Vector xt = random_vec(rng, 5, 1.5);
    const Vector vt = full_gradient(problem, xt);
    const Vector gy_full = full_gradient(problem, y);

    for (const auto sampling :
         {Sampling::Uniform, Sampling::LipschitzProportional}) {
      const auto q = make_sampling_weights(problem, sampling);
      Vector mean(5, 0.0);
      double variance = 0.0, bound = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const Vector v = reduced_gradient(problem, y, xt, vt, i, q);
        double dev = 0.0;
        for (std::size_t j = 0; j < 5; ++j) {
          mean[j] += q[i] * v[j];
          dev += (gy_full[j] - v[j]) * (gy_full[j] - v[j]);
        }
        variance += q[i] * dev;
        Vector gy, gs;
        problem.component_gradient(i, y, gy);
        problem.component_gradient(i, xt, gs);
        double diff = 0.0;
        for (std::size_t j = 0; j < 5; ++j)
          diff += (gy[j] - gs[j]) * (gy[j] - gs[j]);
        const double w = 1.0 / (q[i] * static_cast<double>(n));
        bound += q[i] * w * w * diff;
      }
      for (std::size_t j = 0; j < 5; ++j)
        CHECK(std::fabs(mean[j] - gy_full[j]) <= 1e-12);
      CHECK(bound - variance >= -1e-12);
    }
  }
}

TEST_CASE("inner step ignores x at the boundary stage") {
  auto fixture = seeded_fixture(21, 3, 4);
  auto problem = fixture.make(0.1);
  const auto q = make_sampling_weights(problem, Sampling::Uniform);
  const auto lip = lipschitz_summary(problem, q, 1.0 / 3.0);
  EuclideanGenerator euclid;
  auto oracle = make_prox_oracle(euclid, problem.regularizer(),
                                 ConstraintSet::full_space());
  AsmdConfig cfg;
  cfg.schedule = AlphaSchedule(2.0, 1.0 / 3.0);

  SplitMix64 rng(4);
  AsmdInnerState state;
  state.xtilde = random_vec(rng, 4, 1.0);
  state.z = random_vec(rng, 4, 1.0);
  state.vtilde = full_gradient(problem, state.xtilde);
  state.x = random_vec(rng, 4, 1.0);

  AsmdInnerState other = state;
  other.x = random_vec(rng, 4, 5.0);  // different x, same everything else

  AsmdStepScratch sa, sb;
  asmd_inner_step(problem, cfg, *oracle, lip.l_bar, q, 1, 2, state, sa);
  asmd_inner_step(problem, cfg, *oracle, lip.l_bar, q, 1, 2, other, sb);
  for (std::size_t j = 0; j < 4; ++j) {
    CHECK(sa.y[j] == sb.y[j]);
    CHECK(state.z[j] == other.z[j]);
  }
}

TEST_CASE("single inner step matches a straight-line reimplementation") {
  auto fixture = seeded_fixture(22, 2, 2);
  const double lambda = 0.05;
  auto problem = fixture.make(lambda);
  const auto q = make_sampling_weights(problem, Sampling::Uniform);
  const auto lip = lipschitz_summary(problem, q, 1.0 / 3.0);
  EuclideanGenerator euclid;
  auto oracle = make_prox_oracle(euclid, problem.regularizer(),
                                 ConstraintSet::full_space());
  AsmdConfig cfg;
  cfg.schedule = AlphaSchedule(2.0, 1.0 / 3.0);
  cfg.check_inequalities = true;

  SplitMix64 rng(17);
  AsmdInnerState state;
  state.xtilde = random_vec(rng, 2, 1.0);
  state.x = random_vec(rng, 2, 1.0);
  state.z = random_vec(rng, 2, 1.0);
  state.vtilde = full_gradient(problem, state.xtilde);
  const AsmdInnerState before = state;

  const std::int64_t s = 3;
  const std::size_t pick = 1;
  AsmdStepScratch scratch;
  asmd_inner_step(problem, cfg, *oracle, lip.l_bar, q, s, pick, state, scratch);

  // Straight-line reference with plain loops.
  const double a2 = 2.0 / (3.0 + 2.0);
  const double a3 = 1.0 / 3.0;
  const double a1 = 1.0 - a3 - a2;
  const double theta = a2 * lip.l_bar;
  double y[2], gy[2], gs[2], v[2], w[2], znew[2], xhat[2];
  for (int j = 0; j < 2; ++j)
    y[j] = a1 * before.x[j] + a2 * before.z[j] + a3 * before.xtilde[j];
  const auto& row = fixture.rows[pick];
  const double ry = row[0] * y[0] + row[1] * y[1] - fixture.labels[pick];
  const double rs = row[0] * before.xtilde[0] + row[1] * before.xtilde[1] -
                    fixture.labels[pick];
  for (int j = 0; j < 2; ++j) {
    gy[j] = row[j] * ry;
    gs[j] = row[j] * rs;
    v[j] = before.vtilde[j] + (gy[j] - gs[j]) / (q[pick] * 2.0);
    w[j] = before.z[j] - v[j] / theta;
    const double t = std::max(std::fabs(w[j]) - lambda / theta, 0.0);
    znew[j] = std::copysign(t, w[j]);
    xhat[j] = a1 * before.x[j] + a2 * znew[j] + a3 * before.xtilde[j];
  }
  for (int j = 0; j < 2; ++j) {
    CHECK(state.z[j] == doctest::Approx(znew[j]).epsilon(1e-12));
    CHECK(state.x[j] == doctest::Approx(xhat[j]).epsilon(1e-12));
  }
}

TEST_CASE("zero stages returns the initial point") {
  auto fixture = seeded_fixture(23, 3, 3);
  auto problem = fixture.make(0.1);
  AsmdConfig cfg;
  cfg.stages = 0;
  cfg.inner_steps = 2;
  const Vector x0{0.1, -0.2, 0.3};
  const auto trace = run_asmd(problem, cfg, x0);
  CHECK(trace.records.size() == 1);
  CHECK(trace.records[0].gradient_evals == 0);
  CHECK(trace.final_point == x0);
}

TEST_CASE("one deterministic stage matches a hand evaluator") {
  // n = 1, m = 1: no sampling ambiguity, everything is a closed form.
  LassoFixture f;
  f.rows = {{2.0, -1.0}};
  f.labels = {0.5};
  auto problem = f.make(0.0);
  AsmdConfig cfg;
  cfg.stages = 1;
  cfg.inner_steps = 1;
  cfg.schedule = AlphaSchedule(2.0, 1.0 / 3.0);
  cfg.variant = AsmdConfig::Variant::I;
  const Vector x0{1.0, 1.0};
  const auto trace = run_asmd(problem, cfg, x0);

  // Hand evaluation. L = ||a||^2 = 5, l_bar = 5 + 3*5 = 20.
  const double a2 = 2.0 / 3.0, a3 = 1.0 / 3.0;
  const double theta = a2 * 20.0;
  double y[2], v[2], z[2], xh[2];
  const double r0 = 2.0 * 1.0 - 1.0 * 1.0 - 0.5;  // residual at x0
  const double vt[2] = {2.0 * r0, -1.0 * r0};
  for (int j = 0; j < 2; ++j) y[j] = a2 * x0[j] + a3 * x0[j];
  const double ry = 2.0 * y[0] - y[1] - 0.5;
  const double gy[2] = {2.0 * ry, -1.0 * ry};
  for (int j = 0; j < 2; ++j) {
    v[j] = vt[j] + (gy[j] - vt[j]) / 1.0;
    z[j] = x0[j] - v[j] / theta;
    xh[j] = a2 * z[j] + a3 * x0[j];
  }
  CHECK(trace.final_point[0] == doctest::Approx(xh[0]).epsilon(1e-12));
  CHECK(trace.final_point[1] == doctest::Approx(xh[1]).epsilon(1e-12));
  CHECK(trace.records.back().gradient_evals == 1 + 2);
}

TEST_CASE("seeded runs are bit identical and counters are exact") {
  const auto synth = generate_synthetic_lasso(40, 6, 123);
  auto problem = build_lasso_problem(synth.data, 0.1);
  AsmdConfig cfg;
  cfg.stages = 4;
  cfg.inner_steps = 15;
  cfg.seed = 99;
  cfg.variant = AsmdConfig::Variant::II;
  cfg.check_inequalities = true;

  const Vector x0(6, 0.0);
  const auto t1 = run_asmd(problem, cfg, x0);
  const auto t2 = run_asmd(problem, cfg, x0);
  REQUIRE(t1.records.size() == t2.records.size());
  for (std::size_t i = 0; i < t1.records.size(); ++i) {
    CHECK(t1.records[i].objective == t2.records[i].objective);
    CHECK(t1.records[i].gradient_evals == t2.records[i].gradient_evals);
    const std::int64_t s = t1.records[i].stage;
    CHECK(t1.records[i].gradient_evals == s * (40 + 2 * 15));
  }
  CHECK(t1.final_point == t2.final_point);
  CHECK(t1.records.back().max_z_norm > 0.0);
}

TEST_CASE("all variants pass the x-update inequality check") {
  const auto synth = generate_synthetic_lasso(25, 5, 7);
  auto problem = build_lasso_problem(synth.data, 0.1);
  for (const auto variant :
       {AsmdConfig::Variant::I, AsmdConfig::Variant::II,
        AsmdConfig::Variant::Blend}) {
    AsmdConfig cfg;
    cfg.stages = 3;
    cfg.inner_steps = 10;
    cfg.variant = variant;
    cfg.blend_lambda = 0.4;
    cfg.check_inequalities = true;
    CHECK_NOTHROW(run_asmd(problem, cfg, Vector(5, 0.0)));
  }
}

TEST_CASE("variant II never does worse than the interpolated point") {
  auto fixture = seeded_fixture(29, 4, 3);
  const double lambda = 0.2;
  auto problem = fixture.make(lambda);
  const auto q = make_sampling_weights(problem, Sampling::Uniform);
  const auto lip = lipschitz_summary(problem, q, 1.0 / 3.0);
  EuclideanGenerator euclid;
  auto oracle = make_prox_oracle(euclid, problem.regularizer(),
                                 ConstraintSet::full_space());
  SplitMix64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    AsmdConfig cfg;
    cfg.variant = AsmdConfig::Variant::II;
    AsmdInnerState state;
    state.xtilde = random_vec(rng, 3, 1.0);
    state.x = random_vec(rng, 3, 1.0);
    state.z = random_vec(rng, 3, 1.0);
    state.vtilde = full_gradient(problem, state.xtilde);
    AsmdStepScratch scratch;
    asmd_inner_step(problem, cfg, *oracle, lip.l_bar, q, 2,
                    trial % 4, state, scratch);
    auto side = [&](const Vector& u) {
      double sq = 0.0;
      for (std::size_t j = 0; j < 3; ++j)
        sq += (u[j] - scratch.y[j]) * (u[j] - scratch.y[j]);
      return dot(scratch.v, u) + 0.5 * lip.l_bar * sq +
             lambda * l1_norm(u);
    };
    CHECK(side(state.x) <= side(scratch.xhat) + 1e-10);
  }
}

TEST_CASE("stage average satisfies the combination rule") {
  auto fixture = seeded_fixture(31, 5, 4);
  auto problem = fixture.make(0.1);
  const auto q = make_sampling_weights(problem, Sampling::Uniform);
  const auto lip = lipschitz_summary(problem, q, 1.0 / 3.0);
  EuclideanGenerator euclid;
  auto oracle = make_prox_oracle(euclid, problem.regularizer(),
                                 ConstraintSet::full_space());
  AsmdConfig cfg;

  SplitMix64 rng(0);
  AsmdInnerState state;
  state.xtilde = Vector(4, 0.0);
  state.x = Vector(4, 0.0);
  state.z = Vector(4, 0.0);
  state.vtilde = full_gradient(problem, state.xtilde);
  AsmdStepScratch scratch;
  const DiscreteSampler sampler(q);
  Vector xsum(4, 0.0);
  double value_sum = 0.0;
  double best = kInfinity;
  const int m = 12;
  for (int k = 0; k < m; ++k) {
    asmd_inner_step(problem, cfg, *oracle, lip.l_bar, q, 1,
                    sampler.sample(rng), state, scratch);
    kernels::add_inplace(xsum.data(), state.x.data(), 4);
    const double val = objective_value(problem, state.x);
    value_sum += val;
    best = std::min(best, val);
  }
  kernels::div_scalar(xsum.data(), static_cast<double>(m), 4);
  // Average rule: by convexity the averaged point is no worse than the mean.
  CHECK(objective_value(problem, xsum) <= value_sum / m + 1e-12);
  // Best rule: equal to the minimum by construction.
  CHECK(best <= value_sum / m + 1e-12);
}

TEST_CASE("box-constrained run keeps iterates feasible") {
  auto fixture = seeded_fixture(37, 6, 3);
  auto problem = fixture.make(0.0);
  AsmdConfig cfg;
  cfg.stages = 3;
  cfg.inner_steps = 8;
  cfg.constraint = ConstraintSet::box({-0.5, -0.5, -0.5}, {0.5, 0.5, 0.5});
  cfg.check_inequalities = true;
  bool feasible = true;
  cfg.stage_observer = [&](std::int64_t, const Vector& xt) {
    feasible = feasible && cfg.constraint.contains(xt, 1e-9);
  };
  const auto trace = run_asmd(problem, cfg, Vector(3, 0.0));
  CHECK(feasible);
  CHECK(cfg.constraint.contains(trace.final_point, 1e-9));

  CHECK_THROWS_AS(run_asmd(problem, cfg, Vector(3, 2.0)),
                  std::invalid_argument);
}

TEST_CASE("best rule never exceeds the stage minimum") {
  const auto synth = generate_synthetic_lasso(20, 4, 55);
  auto problem = build_lasso_problem(synth.data, 0.1);
  AsmdConfig avg_cfg, best_cfg;
  avg_cfg.stages = best_cfg.stages = 5;
  avg_cfg.inner_steps = best_cfg.inner_steps = 10;
  avg_cfg.seed = best_cfg.seed = 3;
  best_cfg.xtilde_rule = AsmdConfig::XTildeRule::Best;
  const auto ta = run_asmd(problem, avg_cfg, Vector(4, 0.0));
  const auto tb = run_asmd(problem, best_cfg, Vector(4, 0.0));
  // Same sample path; the best rule picks the per-stage minimizer, so its
  // recorded objective is a stage minimum while the average is only bounded
  // by the stage mean.
  CHECK(tb.records.back().objective <=
        ta.records.back().objective + 1e-9);
}

TEST_CASE("custom sampling weights drive the run") {
  const auto synth = generate_synthetic_lasso(8, 3, 91);
  auto problem = build_lasso_problem(synth.data, 0.1);
  AsmdConfig cfg;
  cfg.stages = 3;
  cfg.inner_steps = 6;
  cfg.sampling = Sampling::Custom;
  cfg.custom_weights.assign(8, 0.1);
  cfg.custom_weights[0] = 0.3;  // sums to 1
  const auto trace = run_asmd(problem, cfg, Vector(3, 0.0));
  CHECK(trace.records.size() == 4);
  CHECK(all_finite(trace.final_point));

  cfg.custom_weights[0] = 0.4;  // no longer sums to 1
  CHECK_THROWS_AS(run_asmd(problem, cfg, Vector(3, 0.0)),
                  std::invalid_argument);
}

TEST_CASE("inexact hypotheses flag tracks generator and schedule") {
  // Simplex-constrained quadratic handled by the entropy generator.
  std::vector<std::shared_ptr<const Component>> comps;
  comps.push_back(std::make_shared<FunctionalComponent>(
      [](std::span<const double> x) {
        double acc = 0.0;
        for (double c : x) acc += 0.5 * (c - 0.2) * (c - 0.2);
        return acc;
      },
      [](std::span<const double> x, std::span<double> out) {
        for (std::size_t j = 0; j < x.size(); ++j) out[j] = x[j] - 0.2;
      },
      1.0));
  FiniteSumProblem problem(std::move(comps),
                           std::make_shared<ZeroRegularizer>(), 3);
  AsmdConfig cfg;
  cfg.stages = 2;
  cfg.inner_steps = 3;
  cfg.constraint = ConstraintSet::simplex();
  cfg.generator = std::make_shared<EntropyGenerator>();
  const Vector x0(3, 1.0 / 3.0);

  auto trace = run_asmd(problem, cfg, x0);
  CHECK(trace.inexact_rate_hypotheses_met);  // exact prox
  CHECK(cfg.constraint.contains(trace.final_point, 1e-9));

  cfg.epsilon = EpsilonSchedule::fixed(1e-3);
  trace = run_asmd(problem, cfg, x0);
  CHECK(!trace.inexact_rate_hypotheses_met);  // unbounded generator smoothness

  cfg.generator = std::make_shared<EuclideanGenerator>();
  cfg.epsilon = EpsilonSchedule::decaying(1e-3, 4.0);
  trace = run_asmd(problem, cfg, x0);
  CHECK(trace.inexact_rate_hypotheses_met);

  cfg.epsilon = EpsilonSchedule::fixed(1e-3);
  trace = run_asmd(problem, cfg, x0);
  CHECK(!trace.inexact_rate_hypotheses_met);  // non-summable schedule
}
