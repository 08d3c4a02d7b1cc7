#include "asmd/problem.hpp"

#include <algorithm>
#include <numeric>

namespace asmd {

bool ConstraintSet::contains(const Vector& x, double tol) const {
  switch (kind) {
    case Kind::FullSpace:
      return true;
    case Kind::Box: {
      if (x.size() != lo.size()) return false;
      for (std::size_t i = 0; i < x.size(); ++i)
        if (x[i] < lo[i] - tol || x[i] > hi[i] + tol) return false;
      return true;
    }
    case Kind::Simplex: {
      double s = 0.0;
      for (double v : x) {
        if (v < -tol) return false;
        s += v;
      }
      return std::fabs(s - 1.0) <= tol * static_cast<double>(x.size() + 1);
    }
  }
  return false;
}

namespace {

// Euclidean projection onto the unit simplex (sort-based).
void project_simplex(const Vector& w, Vector& out) {
  const std::size_t n = w.size();
  Vector u = w;
  std::sort(u.begin(), u.end(), std::greater<double>());
  double css = 0.0;
  double tau = 0.0;
  std::size_t rho = 0;
  for (std::size_t j = 0; j < n; ++j) {
    css += u[j];
    const double t = (css - 1.0) / static_cast<double>(j + 1);
    if (u[j] - t > 0.0) {
      rho = j + 1;
      tau = t;
    }
  }
  (void)rho;
  out.resize(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = std::max(w[i] - tau, 0.0);
}

}  // namespace

void ConstraintSet::project(const Vector& w, Vector& out) const {
  switch (kind) {
    case Kind::FullSpace:
      out = w;
      return;
    case Kind::Box:
      check_same_dim(w, lo, "box projection");
      out.resize(w.size());
      kernels::clamp(out.data(), w.data(), lo.data(), hi.data(), w.size());
      return;
    case Kind::Simplex:
      project_simplex(w, out);
      return;
  }
}

FiniteSumProblem::FiniteSumProblem(
    std::vector<std::shared_ptr<const Component>> components,
    std::shared_ptr<const Regularizer> regularizer, std::size_t dimension)
    : components_(std::move(components)),
      regularizer_(std::move(regularizer)),
      dimension_(dimension) {
  if (components_.empty())
    throw std::invalid_argument("finite sum needs at least one component");
  if (!regularizer_) throw std::invalid_argument("null regularizer");
}

void FiniteSumProblem::check_dim(const Vector& x, const char* what) const {
  if (x.size() != dimension_)
    throw std::invalid_argument(std::string("dimension mismatch in ") + what);
}

double FiniteSumProblem::component_value(std::size_t i, const Vector& x) const {
  check_dim(x, "component_value");
  return components_[i]->value(x);
}

void FiniteSumProblem::component_gradient(std::size_t i, const Vector& x,
                                          Vector& out) const {
  check_dim(x, "component_gradient");
  out.resize(dimension_);
  components_[i]->gradient(x, out);
  grad_evals_.fetch_add(1, std::memory_order_relaxed);
}

double FiniteSumProblem::smooth_value(const Vector& x) const {
  check_dim(x, "smooth_value");
  double acc = 0.0;
  for (std::size_t i = 0; i < components_.size(); ++i)
    acc += components_[i]->value(x);
  return acc / static_cast<double>(components_.size());
}

std::vector<double> FiniteSumProblem::lipschitz_constants() const {
  std::vector<double> ls;
  ls.reserve(components_.size());
  for (const auto& c : components_) ls.push_back(c->lipschitz());
  return ls;
}

void full_gradient(const FiniteSumProblem& problem, const Vector& x,
                   Vector& out) {
  problem.check_dim(x, "full_gradient");
  if (!problem.regularizer_->in_domain(x))
    throw std::invalid_argument("full_gradient: point outside dom(P)");
  const std::size_t n = problem.components_.size();
  const std::size_t d = problem.dimension_;
  out.assign(d, 0.0);
  Vector buf(d);
  for (std::size_t i = 0; i < n; ++i) {
    problem.components_[i]->gradient(x, buf);
    kernels::add_inplace(out.data(), buf.data(), d);
  }
  kernels::div_scalar(out.data(), static_cast<double>(n), d);
  problem.grad_evals_.fetch_add(n, std::memory_order_relaxed);
}

Vector full_gradient(const FiniteSumProblem& problem, const Vector& x) {
  Vector out;
  full_gradient(problem, x, out);
  return out;
}

double objective_value(const FiniteSumProblem& problem, const Vector& x) {
  const double p = problem.regularizer().value(x);
  if (p == kInfinity) return kInfinity;
  return problem.smooth_value(x) + p;
}

LipschitzSummary lipschitz_summary(const FiniteSumProblem& problem,
                                   const std::vector<double>& q,
                                   double alpha3) {
  const std::size_t n = problem.num_components();
  if (q.size() != n)
    throw std::invalid_argument("sampling vector length != n");
  if (alpha3 <= 0.0 || alpha3 >= 1.0)
    throw std::invalid_argument("alpha3 must lie in (0, 1)");
  double l_avg = 0.0;
  double l_weighted = 0.0;
  const double dn = static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (q[i] <= 0.0) throw std::invalid_argument("sampling weights must be > 0");
    const double li = problem.component(i).lipschitz();
    l_avg += li;
    l_weighted = std::max(l_weighted, li / (q[i] * dn));
  }
  l_avg /= dn;
  return {l_avg, l_weighted, l_avg + l_weighted / alpha3};
}

std::vector<double> make_sampling_weights(const FiniteSumProblem& problem,
                                          Sampling sampling,
                                          const std::vector<double>& custom) {
  const std::size_t n = problem.num_components();
  switch (sampling) {
    case Sampling::Uniform:
      return std::vector<double>(n, 1.0 / static_cast<double>(n));
    case Sampling::LipschitzProportional: {
      std::vector<double> q = problem.lipschitz_constants();
      const double total = std::accumulate(q.begin(), q.end(), 0.0);
      if (total <= 0.0)
        throw std::invalid_argument(
            "lipschitz-proportional sampling needs a positive constant sum");
      for (double& v : q) v /= total;
      return q;
    }
    case Sampling::Custom: {
      if (custom.size() != n)
        throw std::invalid_argument("custom sampling vector length != n");
      return custom;
    }
  }
  throw std::invalid_argument("unknown sampling kind");
}

}  // namespace asmd
