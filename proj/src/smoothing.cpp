#include "asmd/smoothing.hpp"

#include <algorithm>
#include <cmath>

namespace asmd {
namespace {

// log(1 + exp(t)) without overflow.
double softplus(double t) {
  if (t > 0.0) return t + std::log1p(std::exp(-t));
  return std::log1p(std::exp(t));
}

// 1 / (1 + exp(-t)).
double logistic(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

}  // namespace

double ScalarSmoother::value(double t) const {
  switch (kind) {
    case Kind::Sqrt:
      return 0.5 * (t + std::hypot(t, 2.0 * mu));
    case Kind::Neural:
      return mu * softplus(t / mu);
  }
  return 0.0;
}

double ScalarSmoother::derivative(double t) const {
  switch (kind) {
    case Kind::Sqrt:
      return 0.5 * (1.0 + t / std::hypot(t, 2.0 * mu));
    case Kind::Neural:
      return logistic(t / mu);
  }
  return 0.0;
}

double ScalarSmoother::overshoot() const {
  switch (kind) {
    case Kind::Sqrt:
      return 1.0;
    case Kind::Neural:
      return std::log(2.0);
  }
  return 0.0;
}

double smoothed_lipschitz(const SmoothedMax& sm) {
  const double a2 = sm.a2();
  return 2.0 * a2 * a2 / (sm.mu() * sm.strong_concavity()) + sm.a1();
}

BoxQuadraticMax::BoxQuadraticMax(Vector c, double d, double mu)
    : c_(std::move(c)), d_(d), mu_(mu) {
  if (mu <= 0.0) throw std::invalid_argument("smoothing needs mu > 0");
}

SmoothedMax::Eval BoxQuadraticMax::value_grad(const Vector& x) const {
  check_same_dim(x, c_, "box-quadratic max");
  const double t = dot(c_, x) + d_;
  const double z = std::clamp(t / mu_, 0.0, 1.0);
  Eval eval;
  eval.value = z * t - 0.5 * mu_ * z * z;
  eval.z_star = {z};
  eval.gradient.resize(c_.size());
  kernels::scale_store(eval.gradient.data(), c_.data(), z, c_.size());
  return eval;
}

double BoxQuadraticMax::max_value(const Vector& x) const {
  return std::max(dot(c_, x) + d_, 0.0);
}

SimplexEntropyMax::SimplexEntropyMax(std::vector<Vector> rows, Vector offsets,
                                     double mu)
    : rows_(std::move(rows)), offsets_(std::move(offsets)), mu_(mu) {
  if (mu <= 0.0) throw std::invalid_argument("smoothing needs mu > 0");
  if (rows_.empty()) throw std::invalid_argument("empty inner problem");
  if (offsets_.size() != rows_.size())
    throw std::invalid_argument("offsets length != number of rows");
  dim_ = rows_.front().size();
  double frob = 0.0;
  for (const auto& r : rows_) {
    if (r.size() != dim_)
      throw std::invalid_argument("ragged inner-problem rows");
    frob += squared_norm(r);
  }
  // Frobenius norm bounds the spectral norm; cheap and valid for A2.
  spectral_bound_ = std::sqrt(frob);
}

void SimplexEntropyMax::inner_values(const Vector& x, Vector& u) const {
  u.resize(rows_.size());
  for (std::size_t j = 0; j < rows_.size(); ++j)
    u[j] = dot(rows_[j], x) + offsets_[j];
}

SmoothedMax::Eval SimplexEntropyMax::value_grad(const Vector& x) const {
  if (x.size() != dim_)
    throw std::invalid_argument("dimension mismatch in simplex-entropy max");
  Vector u;
  inner_values(x, u);
  const std::size_t p = u.size();
  const double shift = *std::max_element(u.begin(), u.end());
  Eval eval;
  eval.z_star.resize(p);
  double total = 0.0;
  for (std::size_t j = 0; j < p; ++j) {
    eval.z_star[j] = std::exp((u[j] - shift) / mu_);
    total += eval.z_star[j];
  }
  for (double& z : eval.z_star) z /= total;
  eval.value = shift + mu_ * std::log(total) -
               mu_ * std::log(static_cast<double>(p));
  eval.gradient.assign(dim_, 0.0);
  for (std::size_t j = 0; j < p; ++j)
    kernels::axpy(eval.z_star[j], rows_[j].data(), eval.gradient.data(), dim_);
  return eval;
}

double SimplexEntropyMax::max_value(const Vector& x) const {
  Vector u;
  inner_values(x, u);
  return *std::max_element(u.begin(), u.end());
}

}  // namespace asmd
