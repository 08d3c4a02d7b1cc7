#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <vector>

#include "asmd/bregman.hpp"
#include "asmd/problem.hpp"
#include "asmd/vec.hpp"

namespace asmd {

// Solvers for the mirror-descent inner step
//   z  ~argmin_{x in X}  <v, x> + P(x) + theta * D(x, z0)
// either exactly (closed forms) or with a certified epsilon-suboptimal
// answer (overlapping-group penalty).

struct ProxResult {
  Vector point;
  double certified_gap = 0.0;  // upper bound on objective suboptimality
  std::int64_t inner_iterations = 0;
};

struct ProxRequest {
  Vector v;
  double theta = 1.0;
  Vector anchor;  // z0
  const DistanceGenerator* generator = nullptr;
  const Regularizer* regularizer = nullptr;
  ConstraintSet constraint;
  double epsilon = 0.0;
};

class ProxCertificationError : public std::runtime_error {
 public:
  ProxCertificationError(const std::string& what, double best_gap)
      : std::runtime_error(what), best_gap_(best_gap) {}
  double best_gap() const { return best_gap_; }

 private:
  double best_gap_;
};

/// Exact minimizer of <v,x> + lambda ||x||_1 + (theta/2) ||x - z0||^2:
/// coordinate-wise soft threshold of (z0 - v/theta) at lambda/theta.
ProxResult prox_l1(const Vector& v, double theta, const Vector& z0,
                   double lambda);

/// Exact Euclidean projection of (z0 - v/theta) onto X (box or simplex).
ProxResult prox_indicator(const Vector& v, double theta, const Vector& z0,
                          const ConstraintSet& constraint);

/// Entropy-generator prox for P == 0 on the simplex: multiplicative update
/// z_i proportional to z0_i * exp(-v_i/theta), exact.
ProxResult prox_entropy_simplex(const Vector& v, double theta,
                                const Vector& z0);

/// Overlapping coordinate groups; indices are zero-based.
struct OverlapGroups {
  std::vector<std::vector<std::size_t>> groups;

  explicit OverlapGroups(std::vector<std::vector<std::size_t>> g)
      : groups(std::move(g)) {
    for (const auto& grp : groups)
      if (grp.empty()) throw std::invalid_argument("empty group");
  }

  std::size_t size() const { return groups.size(); }
  bool covers(std::size_t dim, std::vector<bool>* mask = nullptr) const;
};

struct OverlapValueResult {
  double value = 0.0;
  // One vector per group, compact over the group's indices; sums to x.
  std::vector<std::vector<double>> decomposition;
  std::int64_t sweeps = 0;
};

/// Value of the overlapping-group penalty
///   Omega(x) = inf { sum_r ||v_r||_2 : supp(v_r) in G_r, sum_r v_r = x },
/// computed by block-coordinate minimization of the shared-coordinate
/// splits. Returns +inf when x is nonzero outside the union of groups.
/// The returned value is an upper bound that meets the true infimum to
/// within `tol` at convergence.
OverlapValueResult overlap_penalty_value_full(const Vector& x,
                                              const OverlapGroups& groups,
                                              double tol = 1e-8,
                                              std::int64_t max_sweeps = 10000);

double overlap_penalty_value(const Vector& x, const OverlapGroups& groups,
                             double tol = 1e-8,
                             std::int64_t max_sweeps = 10000);

struct OverlapProxOptions {
  std::int64_t max_iterations = 100000;
  /// The certificate costs about one extra cycle to evaluate, so it is
  /// checked only every few cycles.
  std::int64_t certificate_interval = 8;
  /// Called with (cycle, best certified gap so far) at every certificate
  /// evaluation.
  std::function<void(std::int64_t, double)> certificate_observer;
};

/// Certified inexact prox for P = lambda * Omega_overlap with the Euclidean
/// generator over the full space. Written over the penalty's decomposition
/// variables the objective becomes
///   0.5 || sum_r v_r - w ||^2 + (lambda/theta) sum_r ||v_r||,
/// with w = z0 - v/theta, and is minimized by cyclic group soft-threshold
/// updates. The certificate is a primal-dual gap: the decomposition bounds
/// the penalty from above and the feasibility-scaled residual w - sum_r v_r
/// is a valid dual point. The returned point carries the best certificate
/// seen so far, so the certified gap is non-increasing along the iteration.
ProxResult prox_overlap_group(const Vector& v, double theta, const Vector& z0,
                              double lambda, const OverlapGroups& groups,
                              double epsilon,
                              const OverlapProxOptions& options = {});

/// P(x) = lambda * Omega_overlap(x); value computed on demand.
class OverlapGroupRegularizer final : public Regularizer {
 public:
  OverlapGroupRegularizer(double lambda, OverlapGroups groups)
      : lambda_(lambda), groups_(std::move(groups)) {
    if (lambda < 0.0) throw std::invalid_argument("penalty weight must be >= 0");
  }

  double value(const Vector& x) const override {
    const double omega = overlap_penalty_value(x, groups_);
    return omega == kInfinity ? kInfinity : lambda_ * omega;
  }
  bool in_domain(const Vector& x) const override {
    return value(x) != kInfinity;
  }
  bool has_exact_prox() const override { return false; }

  double lambda() const { return lambda_; }
  const OverlapGroups& groups() const { return groups_; }

 private:
  double lambda_;
  OverlapGroups groups_;
};

/// Resolved prox step for a (generator, regularizer, constraint) triple.
class ProxOracle {
 public:
  virtual ~ProxOracle() = default;
  virtual ProxResult solve(const Vector& v, double theta, const Vector& z0,
                           double epsilon) const = 0;
  /// True when solve() always returns certified_gap == 0.
  virtual bool exact() const = 0;
};

/// Builds the prox oracle for the supported combinations; throws
/// std::invalid_argument for anything else.
std::unique_ptr<ProxOracle> make_prox_oracle(const DistanceGenerator& gen,
                                             const Regularizer& reg,
                                             const ConstraintSet& constraint);

ProxResult solve_prox(const ProxRequest& request);

}  // namespace asmd
