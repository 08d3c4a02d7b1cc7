#include "asmd/prox.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

namespace asmd {
namespace {

Vector prox_target(const Vector& v, double theta, const Vector& z0) {
  if (theta <= 0.0) throw std::invalid_argument("prox weight must be > 0");
  check_same_dim(v, z0, "prox");
  Vector w(z0.size());
  kernels::step(w.data(), z0.data(), v.data(), -1.0 / theta, v.size());
  return w;
}

}  // namespace

ProxResult prox_l1(const Vector& v, double theta, const Vector& z0,
                   double lambda) {
  if (lambda < 0.0) throw std::invalid_argument("l1 weight must be >= 0");
  const Vector w = prox_target(v, theta, z0);
  ProxResult res;
  res.point.resize(w.size());
  kernels::soft_threshold(res.point.data(), w.data(), lambda / theta,
                          w.size());
  return res;
}

ProxResult prox_indicator(const Vector& v, double theta, const Vector& z0,
                          const ConstraintSet& constraint) {
  const Vector w = prox_target(v, theta, z0);
  ProxResult res;
  constraint.project(w, res.point);
  return res;
}

ProxResult prox_entropy_simplex(const Vector& v, double theta,
                                const Vector& z0) {
  if (theta <= 0.0) throw std::invalid_argument("prox weight must be > 0");
  check_same_dim(v, z0, "prox");
  ProxResult res;
  res.point.resize(z0.size());
  double shift = -kInfinity;
  for (std::size_t i = 0; i < z0.size(); ++i) {
    if (z0[i] <= 0.0)
      throw std::invalid_argument("entropy prox needs an interior anchor");
    res.point[i] = std::log(z0[i]) - v[i] / theta;
    shift = std::max(shift, res.point[i]);
  }
  double total = 0.0;
  for (double& p : res.point) {
    p = std::exp(p - shift);
    total += p;
  }
  for (double& p : res.point) p /= total;
  return res;
}

bool OverlapGroups::covers(std::size_t dim, std::vector<bool>* mask) const {
  std::vector<bool> covered(dim, false);
  for (const auto& g : groups)
    for (std::size_t j : g) {
      if (j >= dim) throw std::invalid_argument("group index out of range");
      covered[j] = true;
    }
  const bool all = std::all_of(covered.begin(), covered.end(),
                               [](bool b) { return b; });
  if (mask) *mask = std::move(covered);
  return all;
}

namespace {

struct SharedCoordinate {
  std::size_t coord;                 // coordinate index in x
  std::vector<std::size_t> members;  // (group, position-within-group) pairs
  std::vector<std::size_t> positions;
};

// 1-D convex minimization by ternary search over a bracketing interval.
double minimize_1d(const std::function<double(double)>& f, double lo,
                   double hi) {
  for (int it = 0; it < 100 && hi - lo > 0.0; ++it) {
    const double m1 = lo + (hi - lo) / 3.0;
    const double m2 = hi - (hi - lo) / 3.0;
    if (f(m1) <= f(m2)) hi = m2;
    else lo = m1;
  }
  return 0.5 * (lo + hi);
}

// Shared coordinates and the groups (with in-group positions) owning them.
std::vector<SharedCoordinate> build_shared_coordinates(
    const OverlapGroups& groups, std::size_t dim) {
  std::vector<int> multiplicity(dim, 0);
  for (const auto& g : groups.groups)
    for (std::size_t j : g) ++multiplicity[j];
  std::vector<SharedCoordinate> shared;
  for (std::size_t j = 0; j < dim; ++j) {
    if (multiplicity[j] < 2) continue;
    SharedCoordinate sc;
    sc.coord = j;
    for (std::size_t r = 0; r < groups.size(); ++r) {
      const auto& g = groups.groups[r];
      for (std::size_t k = 0; k < g.size(); ++k)
        if (g[k] == j) {
          sc.members.push_back(r);
          sc.positions.push_back(k);
        }
    }
    shared.push_back(std::move(sc));
  }
  return shared;
}

struct RefineResult {
  double value = 0.0;
  std::int64_t sweeps = 0;
};

// Block-coordinate minimization of sum_r ||v_r|| over the shared-coordinate
// splits; every pairwise move solves its 1-d problem exactly, so the sum of
// the decomposition is preserved and the value decreases monotonically.
// Stops when a full sweep improves by less than stop_tol.
RefineResult refine_decomposition(const std::vector<SharedCoordinate>& shared,
                                  std::vector<std::vector<double>>& dec,
                                  double stop_tol, std::int64_t max_sweeps) {
  const std::size_t B = dec.size();
  std::vector<double> sqnorm(B);
  auto recompute_norms = [&] {
    for (std::size_t r = 0; r < B; ++r)
      sqnorm[r] = kernels::squared_norm(dec[r].data(), dec[r].size());
  };
  auto objective = [&] {
    double acc = 0.0;
    for (std::size_t r = 0; r < B; ++r)
      acc += std::sqrt(std::max(sqnorm[r], 0.0));
    return acc;
  };
  recompute_norms();
  RefineResult res;
  res.value = objective();
  if (shared.empty()) return res;

  double prev = res.value;
  for (std::int64_t sweep = 0; sweep < max_sweeps; ++sweep) {
    for (const auto& sc : shared) {
      // Pairwise exact moves between consecutive owners of the coordinate.
      for (std::size_t a = 0; a + 1 < sc.members.size(); ++a) {
        const std::size_t r1 = sc.members[a];
        const std::size_t r2 = sc.members[a + 1];
        const std::size_t k1 = sc.positions[a];
        const std::size_t k2 = sc.positions[a + 1];
        double& v1 = dec[r1][k1];
        double& v2 = dec[r2][k2];
        const double pair_sum = v1 + v2;
        const double c1 = std::max(sqnorm[r1] - v1 * v1, 0.0);
        const double c2 = std::max(sqnorm[r2] - v2 * v2, 0.0);
        auto f = [&](double t) {
          const double s = pair_sum - t;
          return std::sqrt(c1 + t * t) + std::sqrt(c2 + s * s);
        };
        const double lo = std::min(0.0, pair_sum);
        const double hi = std::max(0.0, pair_sum);
        const double t = minimize_1d(f, lo, hi);
        v1 = t;
        v2 = pair_sum - t;
        sqnorm[r1] = c1 + v1 * v1;
        sqnorm[r2] = c2 + v2 * v2;
      }
    }
    recompute_norms();
    const double cur = objective();
    res.sweeps = sweep + 1;
    res.value = cur;
    if (prev - cur < stop_tol) break;
    prev = cur;
  }
  return res;
}

}  // namespace

OverlapValueResult overlap_penalty_value_full(const Vector& x,
                                              const OverlapGroups& groups,
                                              double tol,
                                              std::int64_t max_sweeps) {
  const std::size_t dim = x.size();
  OverlapValueResult res;

  std::vector<bool> covered;
  groups.covers(dim, &covered);
  for (std::size_t j = 0; j < dim; ++j)
    if (!covered[j] && x[j] != 0.0) {
      res.value = kInfinity;
      return res;
    }

  const std::size_t B = groups.size();
  std::vector<int> multiplicity(dim, 0);
  for (const auto& g : groups.groups)
    for (std::size_t j : g) ++multiplicity[j];

  // Even initial split.
  res.decomposition.resize(B);
  for (std::size_t r = 0; r < B; ++r) {
    const auto& g = groups.groups[r];
    res.decomposition[r].resize(g.size());
    for (std::size_t k = 0; k < g.size(); ++k)
      res.decomposition[r][k] =
          x[g[k]] / static_cast<double>(multiplicity[g[k]]);
  }

  const auto shared = build_shared_coordinates(groups, dim);
  const RefineResult refined =
      refine_decomposition(shared, res.decomposition, tol, max_sweeps);
  res.value = refined.value;
  res.sweeps = refined.sweeps;
  return res;
}

double overlap_penalty_value(const Vector& x, const OverlapGroups& groups,
                             double tol, std::int64_t max_sweeps) {
  return overlap_penalty_value_full(x, groups, tol, max_sweeps).value;
}

ProxResult prox_overlap_group(const Vector& v, double theta, const Vector& z0,
                              double lambda, const OverlapGroups& groups,
                              double epsilon,
                              const OverlapProxOptions& options) {
  if (epsilon <= 0.0)
    throw std::invalid_argument("overlap prox needs a positive tolerance");
  const Vector w = prox_target(v, theta, z0);
  const std::size_t dim = w.size();
  const double kappa = lambda / theta;
  const std::size_t B = groups.size();
  groups.covers(dim);  // validates indices

  // Substituting the penalty's decomposition into the prox objective turns
  // it into an unconstrained problem over the per-group vectors,
  //   min_{v_1..v_B} 0.5 ||sum_r v_r - w||^2 + kappa * sum_r ||v_r||,
  // whose block updates are closed-form group soft thresholds. The
  // nonsmooth part is block separable, so the cyclic updates converge to
  // the global minimum; the running point is x = sum_r v_r.
  std::vector<std::vector<double>> blocks(B);
  for (std::size_t r = 0; r < B; ++r)
    blocks[r].assign(groups.groups[r].size(), 0.0);
  Vector residual = w;  // w - sum_r v_r

  Vector candidate(dim), dual(dim);
  ProxResult best;
  best.certified_gap = kInfinity;

  // Certify a decomposition: its sum is the primal candidate, the residual
  // w - x scaled into the dual-norm ball is the dual point,
  //   p(x) <= 0.5 ||u||^2 + kappa * sum_r ||v_r||,  u = w - x,
  //   d(u_f) = <u_f, w> - 0.5 ||u_f||^2.
  auto certify_pair = [&](const std::vector<std::vector<double>>& dec) {
    std::fill(candidate.begin(), candidate.end(), 0.0);
    double decomposition_norm = 0.0;
    for (std::size_t r = 0; r < B; ++r) {
      const auto& g = groups.groups[r];
      const auto& q = dec[r];
      for (std::size_t k = 0; k < g.size(); ++k) candidate[g[k]] += q[k];
      decomposition_norm +=
          std::sqrt(kernels::squared_norm(q.data(), q.size()));
    }
    kernels::sub(dual.data(), w.data(), candidate.data(), dim);
    double worst = 0.0;
    for (std::size_t r = 0; r < B; ++r) {
      const auto& g = groups.groups[r];
      double s = 0.0;
      for (std::size_t k = 0; k < g.size(); ++k) s += dual[g[k]] * dual[g[k]];
      worst = std::max(worst, std::sqrt(s));
    }
    const double scale = (worst > kappa && worst > 0.0) ? kappa / worst : 1.0;
    const double primal = 0.5 * kernels::squared_norm(dual.data(), dim) +
                          kappa * decomposition_norm;
    double dual_value = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
      const double uf = scale * dual[j];
      dual_value += uf * w[j] - 0.5 * uf * uf;
    }
    // The difference is only trustworthy down to the rounding noise of its
    // terms; never certify below that.
    const double noise = std::numeric_limits<double>::epsilon() *
                         (std::fabs(primal) + std::fabs(dual_value));
    const double gap = theta * std::max(primal - dual_value, noise);
    if (gap < best.certified_gap) {
      best.certified_gap = gap;
      best.point = candidate;
    }
  };

  // Endgame polish through the multiplier form of the dual projection:
  // u_j(lam) = w_j / (1 + sum_{r owning j} lam_r) with one multiplier per
  // group, active groups pinned to ||u_{G_r}|| = kappa. A few Newton steps
  // on the active system converge quadratically where the sweeps crawl, and
  // the multipliers hand back the tight decomposition v_r = lam_r u_{G_r}.
  std::vector<double> multipliers(B, 0.0);
  std::vector<std::vector<double>> newton_dec(blocks);
  auto newton_polish = [&]() {
    if (kappa <= 0.0) return;
    const std::size_t cap = B;
    std::vector<double> sums(dim), g_res(cap);
    std::vector<std::size_t> active;
    std::vector<double> jac(cap * cap), rhs(cap);
    Vector u(dim);
    for (int it = 0; it < 40; ++it) {
      std::fill(sums.begin(), sums.end(), 0.0);
      for (std::size_t r = 0; r < B; ++r)
        if (multipliers[r] > 0.0)
          for (std::size_t j : groups.groups[r]) sums[j] += multipliers[r];
      for (std::size_t j = 0; j < dim; ++j) u[j] = w[j] / (1.0 + sums[j]);

      active.clear();
      for (std::size_t r = 0; r < B; ++r) {
        double s = 0.0;
        for (std::size_t j : groups.groups[r]) s += u[j] * u[j];
        const double violation = s - kappa * kappa;
        if (multipliers[r] > 0.0 || violation > 0.0) {
          g_res[active.size()] = violation;
          active.push_back(r);
        }
      }
      if (active.empty()) break;

      // Jacobian of the active residuals in the multipliers.
      const std::size_t m = active.size();
      std::fill(jac.begin(), jac.begin() + m * m, 0.0);
      for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = a; b < m; ++b) {
          double acc = 0.0;
          for (std::size_t j : groups.groups[active[a]]) {
            bool in_b = false;
            for (std::size_t jb : groups.groups[active[b]])
              if (jb == j) { in_b = true; break; }
            if (in_b) acc += -2.0 * u[j] * u[j] / (1.0 + sums[j]);
          }
          jac[a * m + b] = acc;
          jac[b * m + a] = acc;
        }
      for (std::size_t a = 0; a < m; ++a) rhs[a] = -g_res[a];

      // Gaussian elimination with partial pivoting on the small system.
      bool singular = false;
      for (std::size_t col = 0; col < m && !singular; ++col) {
        std::size_t piv = col;
        for (std::size_t rr = col + 1; rr < m; ++rr)
          if (std::fabs(jac[rr * m + col]) > std::fabs(jac[piv * m + col]))
            piv = rr;
        if (std::fabs(jac[piv * m + col]) < 1e-300) {
          singular = true;
          break;
        }
        if (piv != col) {
          for (std::size_t cc = 0; cc < m; ++cc)
            std::swap(jac[col * m + cc], jac[piv * m + cc]);
          std::swap(rhs[col], rhs[piv]);
        }
        for (std::size_t rr = col + 1; rr < m; ++rr) {
          const double f = jac[rr * m + col] / jac[col * m + col];
          if (f == 0.0) continue;
          for (std::size_t cc = col; cc < m; ++cc)
            jac[rr * m + cc] -= f * jac[col * m + cc];
          rhs[rr] -= f * rhs[col];
        }
      }
      if (singular) break;
      double step_norm = 0.0;
      for (std::size_t rr = m; rr-- > 0;) {
        double acc = rhs[rr];
        for (std::size_t cc = rr + 1; cc < m; ++cc)
          acc -= jac[rr * m + cc] * rhs[cc];
        rhs[rr] = acc / jac[rr * m + rr];
        step_norm = std::max(step_norm, std::fabs(rhs[rr]));
      }
      for (std::size_t a = 0; a < m; ++a)
        multipliers[active[a]] =
            std::max(multipliers[active[a]] + rhs[a], 0.0);
      if (step_norm <= 1e-14 * (1.0 + kappa)) break;
    }

    // Decomposition implied by the multipliers; its sum is the candidate.
    std::fill(sums.begin(), sums.end(), 0.0);
    for (std::size_t r = 0; r < B; ++r)
      if (multipliers[r] > 0.0)
        for (std::size_t j : groups.groups[r]) sums[j] += multipliers[r];
    for (std::size_t r = 0; r < B; ++r) {
      const auto& g = groups.groups[r];
      newton_dec[r].resize(g.size());
      for (std::size_t k = 0; k < g.size(); ++k)
        newton_dec[r][k] =
            multipliers[r] * w[g[k]] / (1.0 + sums[g[k]]);
    }
    certify_pair(newton_dec);
  };

  for (std::int64_t cycle = 0; cycle < options.max_iterations; ++cycle) {
    for (std::size_t r = 0; r < B; ++r) {
      const auto& g = groups.groups[r];
      auto& q = blocks[r];
      // rho = residual restricted to the group plus the current block;
      // the block minimizer is its group soft threshold.
      double sq = 0.0;
      for (std::size_t k = 0; k < g.size(); ++k) {
        const double rho = residual[g[k]] + q[k];
        q[k] = rho;  // temporarily hold rho
        sq += rho * rho;
      }
      const double nrm = std::sqrt(sq);
      const double shrink = nrm > kappa ? 1.0 - kappa / nrm : 0.0;
      for (std::size_t k = 0; k < g.size(); ++k) {
        const double rho = q[k];
        const double vnew = shrink * rho;
        residual[g[k]] = rho - vnew;
        q[k] = vnew;
      }
    }
    best.inner_iterations = cycle + 1;
    if ((cycle + 1) % options.certificate_interval == 0) {
      certify_pair(blocks);
      // Candidate/dual buffers were refreshed from scratch; resynchronize
      // the sweep residual to kill accumulated drift.
      kernels::sub(residual.data(), w.data(), candidate.data(), dim);
      if (best.certified_gap > epsilon) newton_polish();
      if (options.certificate_observer)
        options.certificate_observer(cycle + 1, best.certified_gap);
      if (best.certified_gap <= epsilon) return best;
    }
  }
  certify_pair(blocks);
  if (best.certified_gap > epsilon) newton_polish();
  if (best.certified_gap <= epsilon) return best;
  throw ProxCertificationError(
      "overlap prox failed to certify the requested tolerance",
      best.certified_gap);
}

namespace {

class SoftThresholdOracle final : public ProxOracle {
 public:
  explicit SoftThresholdOracle(double lambda) : lambda_(lambda) {}
  ProxResult solve(const Vector& v, double theta, const Vector& z0,
                   double) const override {
    return prox_l1(v, theta, z0, lambda_);
  }
  bool exact() const override { return true; }

 private:
  double lambda_;
};

class ProjectionOracle final : public ProxOracle {
 public:
  explicit ProjectionOracle(ConstraintSet set) : set_(std::move(set)) {}
  ProxResult solve(const Vector& v, double theta, const Vector& z0,
                   double) const override {
    return prox_indicator(v, theta, z0, set_);
  }
  bool exact() const override { return true; }

 private:
  ConstraintSet set_;
};

class FreeStepOracle final : public ProxOracle {
 public:
  ProxResult solve(const Vector& v, double theta, const Vector& z0,
                   double) const override {
    if (theta <= 0.0) throw std::invalid_argument("prox weight must be > 0");
    ProxResult res;
    res.point.resize(z0.size());
    kernels::step(res.point.data(), z0.data(), v.data(), -1.0 / theta,
                  v.size());
    return res;
  }
  bool exact() const override { return true; }
};

class EntropySimplexOracle final : public ProxOracle {
 public:
  ProxResult solve(const Vector& v, double theta, const Vector& z0,
                   double) const override {
    return prox_entropy_simplex(v, theta, z0);
  }
  bool exact() const override { return true; }
};

class OverlapOracle final : public ProxOracle {
 public:
  OverlapOracle(double lambda, OverlapGroups groups)
      : lambda_(lambda), groups_(std::move(groups)) {}
  ProxResult solve(const Vector& v, double theta, const Vector& z0,
                   double epsilon) const override {
    return prox_overlap_group(v, theta, z0, lambda_, groups_, epsilon);
  }
  bool exact() const override { return false; }

 private:
  double lambda_;
  OverlapGroups groups_;
};

}  // namespace

std::unique_ptr<ProxOracle> make_prox_oracle(const DistanceGenerator& gen,
                                             const Regularizer& reg,
                                             const ConstraintSet& constraint) {
  const bool euclidean = gen.kind() == DistanceGenerator::Kind::Euclidean;
  const bool full_space = constraint.kind == ConstraintSet::Kind::FullSpace;

  if (const auto* l1 = dynamic_cast<const L1Regularizer*>(&reg)) {
    if (euclidean && full_space)
      return std::make_unique<SoftThresholdOracle>(l1->lambda());
    throw std::invalid_argument(
        "l1 prox is only available with the Euclidean generator on the full "
        "space");
  }
  if (const auto* ov = dynamic_cast<const OverlapGroupRegularizer*>(&reg)) {
    if (euclidean && full_space)
      return std::make_unique<OverlapOracle>(ov->lambda(), ov->groups());
    throw std::invalid_argument(
        "overlapping-group prox is only available with the Euclidean "
        "generator on the full space");
  }
  if (const auto* ind = dynamic_cast<const IndicatorRegularizer*>(&reg)) {
    if (!euclidean)
      throw std::invalid_argument("indicator prox needs the Euclidean generator");
    if (!full_space)
      throw std::invalid_argument(
          "indicator regularizer cannot be combined with a separate "
          "constraint set");
    return std::make_unique<ProjectionOracle>(ind->set());
  }
  if (dynamic_cast<const ZeroRegularizer*>(&reg) != nullptr) {
    if (euclidean) {
      if (full_space) return std::make_unique<FreeStepOracle>();
      return std::make_unique<ProjectionOracle>(constraint);
    }
    if (constraint.kind == ConstraintSet::Kind::Simplex)
      return std::make_unique<EntropySimplexOracle>();
    throw std::invalid_argument(
        "entropy generator prox is only available on the simplex with P == 0");
  }
  throw std::invalid_argument("unsupported prox combination");
}

ProxResult solve_prox(const ProxRequest& request) {
  if (request.generator == nullptr || request.regularizer == nullptr)
    throw std::invalid_argument("prox request missing generator/regularizer");
  auto oracle = make_prox_oracle(*request.generator, *request.regularizer,
                                 request.constraint);
  return oracle->solve(request.v, request.theta, request.anchor,
                       request.epsilon);
}

}  // namespace asmd
