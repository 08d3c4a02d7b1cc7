#include "asmd/bregman.hpp"

#include <cmath>
#include <stdexcept>

namespace asmd {
namespace {

void check_entropy_args(const Vector& x, const Vector& y) {
  for (double v : y)
    if (v <= 0.0)
      throw std::invalid_argument("entropy distance: anchor must be interior");
  for (double v : x)
    if (v < 0.0)
      throw std::invalid_argument("entropy distance: x must be nonnegative");
}

}  // namespace

double EntropyGenerator::value(const Vector& x) const {
  double acc = 0.0;
  for (double v : x) {
    if (v < 0.0)
      throw std::invalid_argument("entropy generator: negative coordinate");
    if (v > 0.0) acc += v * std::log(v);
  }
  return acc;
}

void EntropyGenerator::gradient(const Vector& x, Vector& out) const {
  out.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] <= 0.0)
      throw std::invalid_argument("entropy gradient needs interior point");
    out[i] = 1.0 + std::log(x[i]);
  }
}

double bregman_distance(const DistanceGenerator& gen, const Vector& x,
                        const Vector& y) {
  check_same_dim(x, y, "bregman_distance");
  switch (gen.kind()) {
    case DistanceGenerator::Kind::Euclidean: {
      double acc = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - y[i];
        acc += d * d;
      }
      return 0.5 * acc;
    }
    case DistanceGenerator::Kind::Entropy: {
      check_entropy_args(x, y);
      double acc = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] > 0.0) acc += x[i] * std::log(x[i] / y[i]) - x[i] + y[i];
        else acc += y[i];
      }
      return acc;
    }
  }
  throw std::logic_error("unknown generator kind");
}

double three_point_residual(const DistanceGenerator& gen, const Vector& x,
                            const Vector& y, const Vector& z) {
  const double lhs = bregman_distance(gen, x, y) + bregman_distance(gen, y, z) -
                     bregman_distance(gen, x, z);
  Vector gy, gz;
  gen.gradient(y, gy);
  gen.gradient(z, gz);
  double cross = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    cross += (x[i] - y[i]) * (gz[i] - gy[i]);
  return std::fabs(lhs - cross);
}

}  // namespace asmd
