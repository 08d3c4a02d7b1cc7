#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "asmd/data_io.hpp"
#include "asmd/problem.hpp"
#include "asmd/rng.hpp"

using namespace asmd;

namespace {

FiniteSumProblem tiny_lasso(const std::vector<Vector>& rows,
                            const std::vector<double>& labels, double lambda,
                            std::vector<Vector>& storage) {
  storage = rows;
  std::vector<std::shared_ptr<const Component>> comps;
  for (std::size_t i = 0; i < storage.size(); ++i)
    comps.push_back(std::make_shared<SquaredLossComponent>(
        storage[i].data(), storage[i].size(), labels[i]));
  std::shared_ptr<const Regularizer> reg;
  if (lambda == 0.0) reg = std::make_shared<ZeroRegularizer>();
  else reg = std::make_shared<L1Regularizer>(lambda);
  return FiniteSumProblem(std::move(comps), std::move(reg),
                          storage.front().size());
}

Vector random_vec(SplitMix64& rng, std::size_t d, double scale) {
  Vector v(d);
  for (double& x : v) x = rng.uniform(-scale, scale);
  return v;
}

}  // namespace

TEST_CASE("full gradient of a single-sample least squares") {
  std::vector<Vector> storage;
  auto problem = tiny_lasso({{1.0, 0.0}}, {0.0}, 0.1, storage);
  const Vector g = full_gradient(problem, {2.0, 5.0});
  CHECK(g[0] == 2.0);
  CHECK(g[1] == 0.0);
}

TEST_CASE("full gradient vanishes at an interpolation point") {
  std::vector<Vector> storage;
  auto problem =
      tiny_lasso({{1.0, 2.0}, {3.0, -1.0}}, {5.0, 1.0}, 0.1, storage);
  // x = (1, 2) satisfies <a_i, x> = b_i for both rows.
  const Vector g = full_gradient(problem, {1.0, 2.0});
  CHECK(g[0] == 0.0);
  CHECK(g[1] == 0.0);
}

TEST_CASE("full gradient equals the component mean bit for bit") {
  SplitMix64 rng(7);
  std::vector<Vector> rows;
  std::vector<double> labels;
  for (int i = 0; i < 3; ++i) {
    rows.push_back(random_vec(rng, 4, 3.0));
    labels.push_back(rng.uniform(-2.0, 2.0));
  }
  std::vector<Vector> storage;
  auto problem = tiny_lasso(rows, labels, 0.1, storage);
  const Vector x = random_vec(rng, 4, 1.0);

  const Vector g = full_gradient(problem, x);
  // Oracle: ascending sum of component gradients, then divide by n.
  Vector acc(4, 0.0), buf;
  for (std::size_t i = 0; i < 3; ++i) {
    problem.component_gradient(i, x, buf);
    kernels::add_inplace(acc.data(), buf.data(), 4);
  }
  kernels::div_scalar(acc.data(), 3.0, 4);
  for (std::size_t j = 0; j < 4; ++j) CHECK(g[j] == acc[j]);
}

TEST_CASE("objective value examples") {
  std::vector<Vector> storage;
  auto problem = tiny_lasso({{1.0, 0.0}}, {1.0}, 0.1, storage);
  CHECK(objective_value(problem, {1.0, 0.0}) == doctest::Approx(0.1));

  // Indicator regularizer: +inf outside the box.
  std::vector<std::shared_ptr<const Component>> comps;
  comps.push_back(
      std::make_shared<SquaredLossComponent>(storage[0].data(), 2, 1.0));
  FiniteSumProblem constrained(
      std::move(comps),
      std::make_shared<IndicatorRegularizer>(
          ConstraintSet::box({0.0, 0.0}, {1.0, 1.0})),
      2);
  CHECK(objective_value(constrained, {2.0, 0.0}) == kInfinity);
  CHECK(objective_value(constrained, {0.5, 0.5}) <
        std::numeric_limits<double>::infinity());
}

TEST_CASE("objective at zero equals the label energy on a seeded instance") {
  const auto synth = generate_synthetic_lasso(1000, 10, 99);
  auto problem = build_lasso_problem(synth.data, 0.1);
  const Vector zero(10, 0.0);
  double expect = 0.0;
  for (double b : synth.data.labels) expect += 0.5 * b * b;
  expect /= 1000.0;
  CHECK(objective_value(problem, zero) ==
        doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("lipschitz summary closed forms") {
  std::vector<Vector> storage;
  auto problem =
      tiny_lasso({{1.0}, {std::sqrt(3.0)}}, {0.0, 0.0}, 0.0, storage);
  // L = (1, 3).
  const auto uniform = lipschitz_summary(problem, {0.5, 0.5}, 1.0 / 3.0);
  CHECK(uniform.l_avg == doctest::Approx(2.0));
  CHECK(uniform.l_weighted == doctest::Approx(3.0));
  CHECK(uniform.l_bar == doctest::Approx(2.0 + 9.0));

  // Sampling proportional to the constants hits the lower bound L_A.
  const auto prop = lipschitz_summary(problem, {0.25, 0.75}, 0.5);
  CHECK(prop.l_weighted == doctest::Approx(2.0));
  CHECK(prop.l_weighted == doctest::Approx(prop.l_avg));

  CHECK_THROWS_AS(lipschitz_summary(problem, {1.0, 0.0}, 0.5),
                  std::invalid_argument);
  CHECK_THROWS_AS(lipschitz_summary(problem, {0.5, 0.5}, 1.5),
                  std::invalid_argument);
}

TEST_CASE("smoothness and convexity inequalities on sampled pairs") {
  SplitMix64 rng(1234);
  std::vector<Vector> rows{random_vec(rng, 6, 4.0), random_vec(rng, 6, 1.0)};
  std::vector<double> labels{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
  std::vector<Vector> storage;
  auto problem = tiny_lasso(rows, labels, 0.0, storage);

  for (std::size_t i = 0; i < 2; ++i) {
    const double li = problem.component(i).lipschitz();
    for (int trial = 0; trial < 1000; ++trial) {
      const Vector x = random_vec(rng, 6, 2.0);
      const Vector y = random_vec(rng, 6, 2.0);
      Vector gx, gy;
      problem.component_gradient(i, x, gx);
      problem.component_gradient(i, y, gy);
      const double fx = problem.component_value(i, x);
      const double fy = problem.component_value(i, y);
      double diff_sq = 0.0, cross = 0.0, grad_sq = 0.0;
      for (std::size_t j = 0; j < 6; ++j) {
        const double d = x[j] - y[j];
        diff_sq += d * d;
        cross += gy[j] * d;
        const double gd = gy[j] - gx[j];
        grad_sq += gd * gd;
      }
      const double scale = 1.0 + std::fabs(fx) + std::fabs(fy);
      // Descent-lemma upper bound.
      CHECK(fx - (fy + cross + 0.5 * li * diff_sq) <= 1e-9 * scale);
      // Co-coercivity lower bound.
      CHECK(grad_sq / (2.0 * li) + cross - (fx - fy) <= 1e-9 * scale);
      // Plain convexity.
      CHECK(fx - fy - cross >= -1e-9 * scale);
    }
  }
}

TEST_CASE("gradient evaluation accounting is exact") {
  std::vector<Vector> storage;
  auto problem = tiny_lasso({{1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}},
                            {0.0, 0.0, 0.0}, 0.1, storage);
  problem.reset_gradient_evaluations();
  const Vector x{0.3, -0.2};
  (void)full_gradient(problem, x);
  CHECK(problem.gradient_evaluations() == 3);
  Vector buf;
  problem.component_gradient(1, x, buf);
  CHECK(problem.gradient_evaluations() == 4);
  (void)objective_value(problem, x);  // values are free
  CHECK(problem.gradient_evaluations() == 4);
}

TEST_CASE("dimension mismatches are hard errors") {
  std::vector<Vector> storage;
  auto problem = tiny_lasso({{1.0, 0.0}}, {0.0}, 0.1, storage);
  CHECK_THROWS_AS((void)full_gradient(problem, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS((void)objective_value(problem, {1.0, 2.0, 3.0}),
                  std::invalid_argument);
}

TEST_CASE("sampling weight builders") {
  std::vector<Vector> storage;
  auto problem = tiny_lasso({{1.0}, {std::sqrt(3.0)}}, {0.0, 0.0}, 0.0, storage);
  const auto uniform = make_sampling_weights(problem, Sampling::Uniform);
  CHECK(uniform[0] == doctest::Approx(0.5));
  const auto prop =
      make_sampling_weights(problem, Sampling::LipschitzProportional);
  CHECK(prop[0] == doctest::Approx(0.25));
  CHECK(prop[1] == doctest::Approx(0.75));
  CHECK_THROWS_AS(make_sampling_weights(problem, Sampling::Custom, {1.0}),
                  std::invalid_argument);
}
