#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "asmd/vec.hpp"

namespace asmd {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// One summand of a finite-sum objective: value and gradient oracles plus a
/// smoothness constant. Implementations must be convex and L-smooth.
class Component {
 public:
  virtual ~Component() = default;
  virtual double value(std::span<const double> x) const = 0;
  virtual void gradient(std::span<const double> x,
                        std::span<double> out) const = 0;
  virtual double lipschitz() const = 0;
};

/// Squared loss 0.5*(<a,x> - b)^2 over a borrowed feature row.
/// Smoothness constant is ||a||^2, the exact constant of this quadratic.
class SquaredLossComponent final : public Component {
 public:
  SquaredLossComponent(const double* row, std::size_t dim, double label)
      : row_(row), dim_(dim), label_(label),
        lipschitz_(kernels::squared_norm(row, dim)) {}

  double value(std::span<const double> x) const override {
    const double r = kernels::dot(row_, x.data(), dim_) - label_;
    return 0.5 * r * r;
  }

  void gradient(std::span<const double> x, std::span<double> out) const override {
    const double r = kernels::dot(row_, x.data(), dim_) - label_;
    kernels::scale_store(out.data(), row_, r, dim_);
  }

  double lipschitz() const override { return lipschitz_; }

 private:
  const double* row_;
  std::size_t dim_;
  double label_;
  double lipschitz_;
};

/// Adapter for ad-hoc components (mostly used by tests).
class FunctionalComponent final : public Component {
 public:
  FunctionalComponent(std::function<double(std::span<const double>)> value,
                      std::function<void(std::span<const double>, std::span<double>)> grad,
                      double lipschitz)
      : value_(std::move(value)), grad_(std::move(grad)), lipschitz_(lipschitz) {}

  double value(std::span<const double> x) const override { return value_(x); }
  void gradient(std::span<const double> x, std::span<double> out) const override {
    grad_(x, out);
  }
  double lipschitz() const override { return lipschitz_; }

 private:
  std::function<double(std::span<const double>)> value_;
  std::function<void(std::span<const double>, std::span<double>)> grad_;
  double lipschitz_;
};

/// Convex, lower semi-continuous penalty P. Value may be +inf outside the
/// domain. Only the shipped instances (zero, l1, box/simplex indicators,
/// overlapping-group) are supported by the proximal solvers.
class Regularizer {
 public:
  virtual ~Regularizer() = default;
  virtual double value(const Vector& x) const = 0;
  virtual bool in_domain(const Vector& x) const = 0;
  virtual bool has_exact_prox() const = 0;
};

class ZeroRegularizer final : public Regularizer {
 public:
  double value(const Vector&) const override { return 0.0; }
  bool in_domain(const Vector&) const override { return true; }
  bool has_exact_prox() const override { return true; }
};

class L1Regularizer final : public Regularizer {
 public:
  explicit L1Regularizer(double lambda) : lambda_(lambda) {
    if (lambda < 0.0) throw std::invalid_argument("l1 weight must be >= 0");
  }
  double value(const Vector& x) const override { return lambda_ * l1_norm(x); }
  bool in_domain(const Vector&) const override { return true; }
  bool has_exact_prox() const override { return true; }
  double lambda() const { return lambda_; }

 private:
  double lambda_;
};

/// Closed convex constraint set used both as iterate domain X_s and, via an
/// indicator regularizer, as P.
struct ConstraintSet {
  enum class Kind { FullSpace, Box, Simplex };

  Kind kind = Kind::FullSpace;
  Vector lo, hi;  // box only

  static ConstraintSet full_space() { return {}; }

  static ConstraintSet box(Vector lo, Vector hi) {
    if (lo.size() != hi.size())
      throw std::invalid_argument("box bounds dimension mismatch");
    for (std::size_t i = 0; i < lo.size(); ++i)
      if (lo[i] > hi[i]) throw std::invalid_argument("empty box");
    ConstraintSet s;
    s.kind = Kind::Box;
    s.lo = std::move(lo);
    s.hi = std::move(hi);
    return s;
  }

  static ConstraintSet simplex() {
    ConstraintSet s;
    s.kind = Kind::Simplex;
    return s;
  }

  bool contains(const Vector& x, double tol = 1e-12) const;
  // Euclidean projection.
  void project(const Vector& w, Vector& out) const;
};

class IndicatorRegularizer final : public Regularizer {
 public:
  explicit IndicatorRegularizer(ConstraintSet set) : set_(std::move(set)) {}
  double value(const Vector& x) const override {
    return set_.contains(x) ? 0.0 : kInfinity;
  }
  bool in_domain(const Vector& x) const override { return set_.contains(x); }
  bool has_exact_prox() const override { return true; }
  const ConstraintSet& set() const { return set_; }

 private:
  ConstraintSet set_;
};

/// Finite-sum composite problem: F(x) = (1/n) sum f_i(x), plus P(x).
/// Gradient evaluations are tallied in an atomic counter; everything else is
/// immutable after construction and safe to share across threads.
class FiniteSumProblem {
 public:
  FiniteSumProblem(std::vector<std::shared_ptr<const Component>> components,
                   std::shared_ptr<const Regularizer> regularizer,
                   std::size_t dimension);

  std::size_t num_components() const { return components_.size(); }
  std::size_t dimension() const { return dimension_; }
  const Regularizer& regularizer() const { return *regularizer_; }
  const Component& component(std::size_t i) const { return *components_[i]; }

  double component_value(std::size_t i, const Vector& x) const;
  /// Counts one gradient evaluation.
  void component_gradient(std::size_t i, const Vector& x, Vector& out) const;

  /// Smooth part only: (1/n) sum f_i(x). No gradient cost.
  double smooth_value(const Vector& x) const;

  std::uint64_t gradient_evaluations() const {
    return grad_evals_.load(std::memory_order_relaxed);
  }
  void reset_gradient_evaluations() const {
    grad_evals_.store(0, std::memory_order_relaxed);
  }

  std::vector<double> lipschitz_constants() const;

 private:
  friend Vector full_gradient(const FiniteSumProblem&, const Vector&);
  friend void full_gradient(const FiniteSumProblem&, const Vector&, Vector&);

  void check_dim(const Vector& x, const char* what) const;

  std::vector<std::shared_ptr<const Component>> components_;
  std::shared_ptr<const Regularizer> regularizer_;
  std::size_t dimension_;
  mutable std::atomic<std::uint64_t> grad_evals_{0};
};

/// (1/n) sum_i grad f_i(x), accumulated in ascending component order and
/// divided by n at the end. Adds exactly n to the gradient counter.
Vector full_gradient(const FiniteSumProblem& problem, const Vector& x);
void full_gradient(const FiniteSumProblem& problem, const Vector& x,
                   Vector& out);

/// F(x) + P(x); +inf outside dom(P).
double objective_value(const FiniteSumProblem& problem, const Vector& x);

struct LipschitzSummary {
  double l_avg;       // (1/n) sum L_i
  double l_weighted;  // max_i L_i / (q_i n)
  double l_bar;       // l_avg + l_weighted / alpha3
};

/// Step-size constants for a sampling distribution q and interpolation
/// weight alpha3. Requires all q_i > 0 and 0 < alpha3 < 1.
LipschitzSummary lipschitz_summary(const FiniteSumProblem& problem,
                                   const std::vector<double>& q,
                                   double alpha3);

enum class Sampling { Uniform, LipschitzProportional, Custom };

std::vector<double> make_sampling_weights(const FiniteSumProblem& problem,
                                          Sampling sampling,
                                          const std::vector<double>& custom = {});

}  // namespace asmd
