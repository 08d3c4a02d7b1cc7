#pragma once

#include <memory>
#include <optional>

#include "asmd/vec.hpp"

namespace asmd {

/// Distance generator h: strongly convex with constant 1, differentiable on
/// the interior of its domain. Generates D(x, y) = h(x) - h(y) - <grad h(y), x-y>.
class DistanceGenerator {
 public:
  enum class Kind { Euclidean, Entropy };

  virtual ~DistanceGenerator() = default;
  virtual Kind kind() const = 0;
  virtual double value(const Vector& x) const = 0;
  virtual void gradient(const Vector& x, Vector& out) const = 0;
  /// Lipschitz constant of grad h, or nullopt when unbounded.
  virtual std::optional<double> smoothness() const = 0;
};

/// h(x) = 0.5 ||x||^2; D is half the squared Euclidean distance.
class EuclideanGenerator final : public DistanceGenerator {
 public:
  Kind kind() const override { return Kind::Euclidean; }
  double value(const Vector& x) const override { return 0.5 * squared_norm(x); }
  void gradient(const Vector& x, Vector& out) const override { out = x; }
  std::optional<double> smoothness() const override { return 1.0; }
};

/// h(x) = sum x_i log x_i on the positive orthant (simplex in practice).
/// D is the generalized Kullback-Leibler divergence; grad h blows up at the
/// boundary, so no finite smoothness constant exists.
class EntropyGenerator final : public DistanceGenerator {
 public:
  Kind kind() const override { return Kind::Entropy; }
  double value(const Vector& x) const override;
  void gradient(const Vector& x, Vector& out) const override;
  std::optional<double> smoothness() const override { return std::nullopt; }
};

/// D(x, y) >= 0 with D(x, x) = 0. Requires y interior (all y_i > 0 for the
/// entropy generator) and x in the domain (x_i >= 0, with 0 log 0 = 0).
double bregman_distance(const DistanceGenerator& gen, const Vector& x,
                        const Vector& y);

/// | D(x,y) + D(y,z) - D(x,z) - <x-y, grad h(z) - grad h(y)> |.
/// Identically zero up to roundoff; exercised by tests.
double three_point_residual(const DistanceGenerator& gen, const Vector& x,
                            const Vector& y, const Vector& z);

}  // namespace asmd
