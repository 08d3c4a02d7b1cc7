#pragma once

#include <memory>

#include "asmd/problem.hpp"
#include "asmd/vec.hpp"

namespace asmd {

// Smooth surrogates for non-smooth components: scalar smoothers of the
// positive part [t]_+ and strongly-concave-regularized max-type functions
// with a closed-form inner argmax.

/// Smoother of [t]_+ = max(t, 0), parameterized by mu > 0.
///  - Sqrt:   0.5 * (t + sqrt(t^2 + 4 mu^2)),    [t]_+ <= f <= [t]_+ + mu
///  - Neural: mu * log(1 + exp(t / mu)),          [t]_+ <= f <= [t]_+ + mu log 2
/// Both are convex with derivative in (0, 1) and smoothness 1/(4 mu).
struct ScalarSmoother {
  enum class Kind { Sqrt, Neural };

  Kind kind = Kind::Sqrt;
  double mu = 1.0;

  ScalarSmoother(Kind k, double mu_) : kind(k), mu(mu_) {
    if (mu_ <= 0.0) throw std::invalid_argument("smoothing needs mu > 0");
  }

  double value(double t) const;
  double derivative(double t) const;
  /// Upper sandwich constant: f(t) - [t]_+ <= overshoot() * mu.
  double overshoot() const;
  double smoothness() const { return 0.25 / mu; }
};

/// Smoothed hinge component f(x) = smoother(1 - b <a, x>); gradient by the
/// chain rule, smoothness ||a||^2 / (4 mu).
class SmoothedHingeComponent final : public Component {
 public:
  SmoothedHingeComponent(Vector features, double label, ScalarSmoother sm)
      : features_(std::move(features)), label_(label), smoother_(sm),
        lipschitz_(kernels::squared_norm(features_.data(), features_.size()) *
                   sm.smoothness()) {}

  double margin(std::span<const double> x) const {
    return 1.0 - label_ * kernels::dot(features_.data(), x.data(),
                                       features_.size());
  }

  double value(std::span<const double> x) const override {
    return smoother_.value(margin(x));
  }

  void gradient(std::span<const double> x, std::span<double> out) const override {
    const double g = -label_ * smoother_.derivative(margin(x));
    kernels::scale_store(out.data(), features_.data(), g, features_.size());
  }

  double lipschitz() const override { return lipschitz_; }

  /// The unsmoothed hinge value [1 - b <a, x>]_+.
  double hinge_value(std::span<const double> x) const {
    return std::max(margin(x), 0.0);
  }

 private:
  Vector features_;
  double label_;
  ScalarSmoother smoother_;
  double lipschitz_;
};

/// A max-type component  x -> max_{z in Z} g(x, z)  smoothed by subtracting
/// mu * R(z) inside the max, R strongly convex on Z with parameter a and
/// 0 <= R <= r_max. The smoothed function has gradient grad_1 g(x, z*(x))
/// and smoothness 2 A2^2 / (mu a) + A1, where A1 and A2 bound the Lipschitz
/// behavior of grad_1 g in x and z respectively.
class SmoothedMax {
 public:
  struct Eval {
    double value = 0.0;
    Vector gradient;
    Vector z_star;
  };

  virtual ~SmoothedMax() = default;

  virtual std::size_t dimension() const = 0;
  virtual double mu() const = 0;
  virtual double strong_concavity() const = 0;  // a
  virtual double r_max() const = 0;             // max_Z R
  virtual double a1() const = 0;
  virtual double a2() const = 0;

  /// Smoothed value, its gradient, and the inner maximizer.
  virtual Eval value_grad(const Vector& x) const = 0;
  /// The original (unsmoothed) max value.
  virtual double max_value(const Vector& x) const = 0;
};

/// 2 A2^2 / (mu a) + A1.
double smoothed_lipschitz(const SmoothedMax& sm);

/// g(x, z) = z * (<c, x> + d) with z in [0, 1] and R(z) = z^2 / 2.
/// The unsmoothed max is the positive part [<c,x> + d]_+; the smoothed value
/// is its Moreau/Huber envelope with z*(x) = clip((<c,x>+d)/mu, 0, 1).
class BoxQuadraticMax final : public SmoothedMax {
 public:
  BoxQuadraticMax(Vector c, double d, double mu);

  std::size_t dimension() const override { return c_.size(); }
  double mu() const override { return mu_; }
  double strong_concavity() const override { return 1.0; }
  double r_max() const override { return 0.5; }
  double a1() const override { return 0.0; }
  double a2() const override { return std::sqrt(squared_norm(c_)); }

  Eval value_grad(const Vector& x) const override;
  double max_value(const Vector& x) const override;

 private:
  Vector c_;
  double d_;
  double mu_;
};

/// g(x, z) = <M x + c, z> with z in the unit simplex of dimension p and
/// R(z) = sum z log z + log p (normalized so 0 <= R <= log p). The smoothed
/// value is mu * (logsumexp(u/mu) - log p) for u = M x + c, with
/// z*(x) = softmax(u / mu); the unsmoothed max is max_j u_j.
class SimplexEntropyMax final : public SmoothedMax {
 public:
  /// rows: p rows of length dim (the matrix M), offsets: length p (c).
  SimplexEntropyMax(std::vector<Vector> rows, Vector offsets, double mu);

  std::size_t dimension() const override { return dim_; }
  double mu() const override { return mu_; }
  double strong_concavity() const override { return 1.0; }
  double r_max() const override { return std::log(static_cast<double>(rows_.size())); }
  double a1() const override { return 0.0; }
  double a2() const override { return spectral_bound_; }

  Eval value_grad(const Vector& x) const override;
  double max_value(const Vector& x) const override;

 private:
  void inner_values(const Vector& x, Vector& u) const;

  std::vector<Vector> rows_;
  Vector offsets_;
  std::size_t dim_;
  double mu_;
  double spectral_bound_;
};

/// Adapter so smoothed max-type functions can enter a finite-sum problem.
class SmoothedMaxComponent final : public Component {
 public:
  explicit SmoothedMaxComponent(std::shared_ptr<const SmoothedMax> sm)
      : sm_(std::move(sm)), lipschitz_(smoothed_lipschitz(*sm_)) {}

  double value(std::span<const double> x) const override {
    Vector xv(x.begin(), x.end());
    return sm_->value_grad(xv).value;
  }
  void gradient(std::span<const double> x, std::span<double> out) const override {
    Vector xv(x.begin(), x.end());
    const auto eval = sm_->value_grad(xv);
    std::copy(eval.gradient.begin(), eval.gradient.end(), out.begin());
  }
  double lipschitz() const override { return lipschitz_; }
  const SmoothedMax& inner() const { return *sm_; }

 private:
  std::shared_ptr<const SmoothedMax> sm_;
  double lipschitz_;
};

}  // namespace asmd
