#include "asmd/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "asmd/baselines.hpp"
#include "asmd/bregman.hpp"
#include "asmd/ccsaddle.hpp"
#include "asmd/prox.hpp"
#include "asmd/smoothing.hpp"

namespace asmd {

// ---------------------------------------------------------------------------
// Reference optimum
// ---------------------------------------------------------------------------

namespace {

double penalty_weight_for_cd(const Regularizer& reg) {
  if (dynamic_cast<const ZeroRegularizer*>(&reg) != nullptr) return 0.0;
  if (const auto* l1 = dynamic_cast<const L1Regularizer*>(&reg))
    return l1->lambda();
  throw std::invalid_argument(
      "coordinate descent polish supports only l1 or no penalty");
}

}  // namespace

ReferenceResult coordinate_descent_reference(const FiniteSumProblem& problem,
                                             const Vector& x0, double tol,
                                             std::int64_t max_sweeps) {
  const std::size_t d = problem.dimension();
  const double lambda = penalty_weight_for_cd(problem.regularizer());

  // Probe the quadratic: grad F(x) = H x + g0.
  const Vector zero(d, 0.0);
  const Vector g0 = full_gradient(problem, zero);
  std::vector<Vector> hess(d);
  Vector e(d, 0.0);
  for (std::size_t j = 0; j < d; ++j) {
    e[j] = 1.0;
    hess[j] = full_gradient(problem, e);
    for (std::size_t r = 0; r < d; ++r) hess[j][r] -= g0[r];
    e[j] = 0.0;
  }

  Vector x = x0;
  Vector hx(d, 0.0);
  for (std::size_t j = 0; j < d; ++j)
    if (x[j] != 0.0) kernels::axpy(x[j], hess[j].data(), hx.data(), d);

  auto model_objective = [&] {
    double quad = 0.0, lin = 0.0, l1 = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      quad += x[j] * hx[j];
      lin += g0[j] * x[j];
      l1 += std::fabs(x[j]);
    }
    return 0.5 * quad + lin + lambda * l1;
  };

  double prev = model_objective();
  ReferenceResult res;
  for (std::int64_t sweep = 1; sweep <= max_sweeps; ++sweep) {
    bool moved = false;
    for (std::size_t j = 0; j < d; ++j) {
      const double hjj = hess[j][j];
      if (hjj <= 0.0) continue;
      const double rho = hx[j] + g0[j] - hjj * x[j];
      const double t = std::copysign(std::max(std::fabs(rho) - lambda, 0.0),
                                     -rho) /
                       hjj;
      const double delta = t - x[j];
      if (delta != 0.0) {
        kernels::axpy(delta, hess[j].data(), hx.data(), d);
        x[j] = t;
        moved = true;
      }
    }
    res.cd_sweeps = sweep;
    if (!moved) break;  // exact coordinate-wise fixed point
    const double cur = model_objective();
    if (prev - cur < tol && prev - cur > -tol) break;
    prev = cur;
  }
  res.point = x;
  res.value = objective_value(problem, x);
  return res;
}

ReferenceResult reference_optimum(const FiniteSumProblem& problem,
                                  const ReferenceOptions& options,
                                  const Vector& x0) {
  if (options.tolerance <= 0.0)
    throw std::invalid_argument("reference tolerance must be > 0");
  static const EuclideanGenerator euclid;
  auto oracle = make_prox_oracle(euclid, problem.regularizer(),
                                 ConstraintSet::full_space());
  double l_avg = 0.0;
  for (std::size_t i = 0; i < problem.num_components(); ++i)
    l_avg += problem.component(i).lipschitz();
  l_avg /= static_cast<double>(problem.num_components());

  Vector x = x0, z = x0, y(x0.size()), g;
  // Accelerated iterations with function-value adaptive restart: whenever
  // the objective rises the momentum is reset, which recovers a linear tail
  // on problems with local quadratic growth. Convergence is judged on the
  // running best across windows of iterations; single-step changes go quiet
  // at momentum plateaus long before the optimum. A coordinate descent
  // polish only needs a loose warmstart from this phase.
  const double apg_tol =
      options.cd_polish ? std::max(options.tolerance, 1e-6)
                        : options.tolerance;
  double best = objective_value(problem, x);
  double prev = best;
  Vector best_x = x;
  double checkpoint = best;
  const std::int64_t window = 25;
  std::int64_t local = 0;
  ReferenceResult res;
  bool converged = false;
  for (std::int64_t k = 0; k < options.max_apg_iterations; ++k) {
    const double theta = 2.0 / (static_cast<double>(local) + 2.0);
    for (std::size_t j = 0; j < x.size(); ++j)
      y[j] = (1.0 - theta) * x[j] + theta * z[j];
    full_gradient(problem, y, g);
    z = oracle->solve(g, theta * l_avg, z, options.prox_epsilon).point;
    for (std::size_t j = 0; j < x.size(); ++j)
      x[j] = (1.0 - theta) * x[j] + theta * z[j];
    res.apg_iterations = k + 1;
    ++local;
    const double cur = objective_value(problem, x);
    if (cur > prev) {
      z = x;
      local = 0;
    }
    prev = cur;
    if (cur < best) {
      best = cur;
      best_x = x;
    }
    if ((k + 1) % window == 0) {
      if (checkpoint - best < apg_tol) {
        converged = true;
        break;
      }
      checkpoint = best;
    }
  }
  if (!converged)
    throw ConvergenceError("reference optimum did not converge in budget",
                           best);

  res.point = std::move(best_x);
  res.value = best;
  if (options.cd_polish) {
    ReferenceResult cd = coordinate_descent_reference(
        problem, res.point, options.tolerance * 1e-2, options.max_cd_sweeps);
    cd.apg_iterations = res.apg_iterations;
    if (cd.value <= res.value) return cd;
    res.cd_sweeps = cd.cd_sweeps;
  }
  return res;
}

// ---------------------------------------------------------------------------
// Rate fitting
// ---------------------------------------------------------------------------

double fit_rate(const SolverTrace& trace, std::int64_t first_stage,
                std::int64_t last_stage) {
  std::vector<double> xs, ys;
  for (const auto& r : trace.records) {
    if (r.stage < first_stage || r.stage > last_stage || r.stage < 1) continue;
    if (!r.gap.has_value())
      throw std::invalid_argument("trace has no gap column; set a reference");
    if (*r.gap <= 0.0)
      throw std::invalid_argument(
          "nonpositive gap in window (reference optimum too loose)");
    xs.push_back(std::log(static_cast<double>(r.stage)));
    ys.push_back(std::log(*r.gap));
  }
  if (xs.size() < 5)
    throw std::invalid_argument("need at least 5 trace points in the window");
  const double n = static_cast<double>(xs.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw std::invalid_argument("degenerate fit window");
  return (n * sxy - sx * sy) / denom;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void write_trace_csv(const SolverTrace& trace, const std::string& path,
                     const CsvOptions& options) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out << "stage_or_iter,grads_over_n,objective,gap,wall_ms,max_z_norm\n";
    const double n = static_cast<double>(std::max<std::int64_t>(
        trace.components, 1));
    for (const auto& r : trace.records) {
      out << r.stage << ','
          << fmt17(static_cast<double>(r.gradient_evals) / n) << ','
          << fmt17(r.objective) << ',';
      if (r.gap.has_value()) out << fmt17(std::max(*r.gap, 1e-16));
      out << ',' << fmt17(options.timings ? r.wall_ms : 0.0) << ','
          << fmt17(r.max_z_norm) << '\n';
    }
    if (!out) throw std::runtime_error("failed writing " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

SolverTrace read_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trace " + path);
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("empty trace file " + path);
  SolverTrace trace;
  trace.components = 1;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    while (cells.size() < 6) cells.emplace_back();
    TraceRecord r;
    try {
      r.stage = std::stoll(cells[0]);
      r.gradient_evals =
          static_cast<std::int64_t>(std::llround(std::stod(cells[1])));
      r.objective = std::stod(cells[2]);
      if (!cells[3].empty()) r.gap = std::stod(cells[3]);
      if (!cells[4].empty()) r.wall_ms = std::stod(cells[4]);
      if (!cells[5].empty()) r.max_z_norm = std::stod(cells[5]);
    } catch (const std::exception&) {
      throw std::runtime_error("malformed trace row at line " +
                               std::to_string(line_no) + " of " + path);
    }
    trace.records.push_back(std::move(r));
  }
  return trace;
}

// ---------------------------------------------------------------------------
// Config parsing
// ---------------------------------------------------------------------------

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  ExperimentConfig cfg;
  RunSpec* current = nullptr;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    if (t.front() == '[') {
      if (t.back() != ']')
        throw std::runtime_error("unterminated section at line " +
                                 std::to_string(line_no));
      const std::string inner = trim(t.substr(1, t.size() - 2));
      if (inner.rfind("run", 0) != 0)
        throw std::runtime_error("unknown section '" + inner + "' at line " +
                                 std::to_string(line_no) +
                                 " (expected [run <label>])");
      std::string label = trim(inner.substr(3));
      if (label.empty())
        label = "run" + std::to_string(cfg.runs.size() + 1);
      cfg.runs.push_back({label, {}});
      current = &cfg.runs.back();
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("expected key = value at line " +
                               std::to_string(line_no));
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty())
      throw std::runtime_error("empty key at line " + std::to_string(line_no));
    auto& target = current ? current->keys : cfg.globals;
    if (!target.emplace(key, value).second)
      throw std::runtime_error("duplicate key '" + key + "' at line " +
                               std::to_string(line_no));
  }
  return cfg;
}

// ---------------------------------------------------------------------------
// Experiment runner
// ---------------------------------------------------------------------------

namespace {

const std::set<std::string> kGlobalKeys = {
    "dataset", "N", "D", "seed", "lambda", "penalty",
    "reference", "reference_tol", "mu"};

const std::map<std::string, std::set<std::string>> kSolverKeys = {
    {"asmd",
     {"solver", "seed", "m", "stages", "nu", "alpha3", "variant",
      "blend_lambda", "epsilon_kind", "epsilon0", "epsilon_p", "sampling",
      "xtilde"}},
    {"fista", {"solver", "seed", "steps", "prox_epsilon"}},
    {"apg", {"solver", "seed", "steps", "prox_epsilon"}},
    {"pgd", {"solver", "seed", "steps"}},
    {"spgd", {"solver", "seed", "steps", "gamma0"}},
    {"saddle", {"solver", "seed", "m", "stages", "mu", "sampling"}},
};

std::string joined_keys(const std::set<std::string>& keys) {
  std::string out;
  for (const auto& k : keys) {
    if (!out.empty()) out += ", ";
    out += k;
  }
  return out;
}

template <typename Map>
std::string get_or(const Map& m, const std::string& key,
                   const std::string& fallback) {
  auto it = m.find(key);
  return it == m.end() ? fallback : it->second;
}

double parse_double(const std::string& v, const std::string& key) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw std::runtime_error("invalid number '" + v + "' for key " + key);
  }
}

std::int64_t parse_int(const std::string& v, const std::string& key) {
  try {
    std::size_t used = 0;
    const std::int64_t i = std::stoll(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return i;
  } catch (const std::exception&) {
    throw std::runtime_error("invalid integer '" + v + "' for key " + key);
  }
}

Sampling parse_sampling(const std::string& v) {
  if (v == "uniform") return Sampling::Uniform;
  if (v == "lipschitz") return Sampling::LipschitzProportional;
  throw std::runtime_error("unknown sampling '" + v +
                           "' (valid: uniform, lipschitz)");
}

struct ResolvedExperiment {
  Dataset data;
  std::string penalty;  // l1 | overlap | none
  double lambda = 0.1;
  std::uint64_t seed = 0;
  double reference_tol = 1e-10;
  std::string reference_mode;  // auto | none | numeric
  double mu = 0.1;             // saddle smoothing
};

ResolvedExperiment resolve_globals(const ExperimentConfig& config) {
  for (const auto& [k, v] : config.globals) {
    (void)v;
    if (kGlobalKeys.count(k) == 0)
      throw std::runtime_error("unknown global key '" + k +
                               "' (valid: " + joined_keys(kGlobalKeys) + ")");
  }
  ResolvedExperiment r;
  const std::string dataset = get_or(config.globals, "dataset", "");
  if (dataset.empty())
    throw std::runtime_error("config needs a dataset (synthetic or a path)");
  r.seed = static_cast<std::uint64_t>(
      parse_int(get_or(config.globals, "seed", "0"), "seed"));
  if (dataset == "synthetic") {
    const std::int64_t n = parse_int(get_or(config.globals, "N", "1000"), "N");
    const std::int64_t d = parse_int(get_or(config.globals, "D", "10"), "D");
    if (n < 1 || d < 1) throw std::runtime_error("need N, D >= 1");
    r.data = generate_synthetic_lasso(static_cast<std::size_t>(n),
                                      static_cast<std::size_t>(d), r.seed)
                 .data;
  } else if (std::filesystem::exists(dataset)) {
    r.data = load_libsvm(dataset);
  } else {
    throw std::runtime_error("unknown dataset '" + dataset +
                             "' (valid: synthetic, or a libsvm file path)");
  }
  r.penalty = get_or(config.globals, "penalty", "l1");
  if (r.penalty != "l1" && r.penalty != "overlap" && r.penalty != "none")
    throw std::runtime_error("unknown penalty '" + r.penalty +
                             "' (valid: l1, overlap, none)");
  r.lambda = parse_double(get_or(config.globals, "lambda", "0.1"), "lambda");
  r.reference_mode = get_or(config.globals, "reference", "auto");
  r.reference_tol = parse_double(
      get_or(config.globals, "reference_tol", "1e-10"), "reference_tol");
  r.mu = parse_double(get_or(config.globals, "mu", "0.1"), "mu");
  return r;
}

FiniteSumProblem build_problem(const ResolvedExperiment& r) {
  if (r.penalty == "overlap")
    return build_overlap_problem(r.data, r.lambda, chain_groups(r.data.dims));
  if (r.penalty == "none") return build_lasso_problem(r.data, 0.0);
  return build_lasso_problem(r.data, r.lambda);
}

SaddleProblem build_saddle_problem(const ResolvedExperiment& r, double mu) {
  // Hinge-style saddle instance over the dataset rows: labels are the signs
  // of the centered targets, g_i(x, z) = z * (1 - b_i <a_i, x>), z in [0,1].
  double mean = 0.0;
  for (double b : r.data.labels) mean += b;
  mean /= static_cast<double>(r.data.rows);
  SaddleProblem sp;
  sp.constraint = ConstraintSet::full_space();
  sp.mu = mu;
  sp.components.reserve(r.data.rows);
  for (std::size_t i = 0; i < r.data.rows; ++i) {
    const double b = r.data.labels[i] >= mean ? 1.0 : -1.0;
    Vector c(r.data.dims);
    kernels::scale_store(c.data(), r.data.row(i), -b, r.data.dims);
    sp.components.push_back(
        std::make_shared<BoxQuadraticMax>(std::move(c), 1.0, mu));
  }
  return sp;
}

double inexact_default_eps(const ResolvedExperiment& r) {
  return r.penalty == "overlap" ? 1e-6 : 0.0;
}

// Prox tolerance for reference solves. The certificate arithmetic bottoms
// out near 1e-10 absolute on large-scale data, so the request stays above
// that regardless of how tight the reference tolerance is.
double reference_prox_eps(const ResolvedExperiment& r) {
  if (r.penalty != "overlap") return 0.0;
  return std::max(r.reference_tol * 0.1, 1e-9);
}

struct PreparedRun {
  RunSpec spec;
  std::string csv_path;
  std::map<std::string, std::string> resolved;
};

std::string sanitize(const std::string& label) {
  std::string out;
  for (char c : label)
    out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' ||
            c == '_')
               ? c
               : '_';
  return out;
}

}  // namespace

ReferenceResult compute_reference(const ExperimentConfig& config) {
  const ResolvedExperiment r = resolve_globals(config);
  const FiniteSumProblem problem = build_problem(r);
  ReferenceOptions opts;
  opts.tolerance = r.reference_tol;
  opts.prox_epsilon = reference_prox_eps(r);
  opts.cd_polish = r.penalty != "overlap";
  return reference_optimum(problem, opts, Vector(r.data.dims, 0.0));
}

std::vector<std::string> run_experiment(const ExperimentConfig& config,
                                        const ExperimentOptions& options) {
  const ResolvedExperiment rexp = resolve_globals(config);
  std::filesystem::create_directories(options.out_dir);

  // Validate every run up front so errors surface before any work is done.
  std::vector<PreparedRun> prepared;
  bool any_saddle = false;
  for (const auto& run : config.runs) {
    const std::string solver = get_or(run.keys, "solver", "");
    auto it = kSolverKeys.find(solver);
    if (it == kSolverKeys.end()) {
      std::set<std::string> names;
      for (const auto& [name, keys] : kSolverKeys) {
        (void)keys;
        names.insert(name);
      }
      throw std::runtime_error("unknown solver '" + solver + "' in [run " +
                               run.label +
                               "] (valid: " + joined_keys(names) + ")");
    }
    for (const auto& [k, v] : run.keys) {
      (void)v;
      if (it->second.count(k) == 0)
        throw std::runtime_error("unknown key '" + k + "' for solver " +
                                 solver +
                                 " (valid: " + joined_keys(it->second) + ")");
    }
    if (solver == "saddle") any_saddle = true;
    PreparedRun p;
    p.spec = run;
    p.csv_path = options.out_dir + "/" + sanitize(run.label) + ".csv";
    prepared.push_back(std::move(p));
  }

  // Reference optimum, shared by all finite-sum runs.
  std::optional<double> reference;
  if (rexp.reference_mode == "auto") {
    if (!prepared.empty() && !(any_saddle && prepared.size() == 1)) {
      const FiniteSumProblem problem = build_problem(rexp);
      ReferenceOptions opts;
      opts.tolerance = rexp.reference_tol;
      opts.prox_epsilon = reference_prox_eps(rexp);
      opts.cd_polish = rexp.penalty != "overlap";
      reference =
          reference_optimum(problem, opts, Vector(rexp.data.dims, 0.0)).value;
    }
  } else if (rexp.reference_mode != "none") {
    reference = parse_double(rexp.reference_mode, "reference");
  }

  std::optional<double> saddle_reference;
  if (any_saddle) {
    const double mu =
        parse_double(get_or(config.globals, "mu", "0.1"), "mu");
    const SaddleProblem sp = build_saddle_problem(rexp, mu);
    const FiniteSumProblem smooth = make_smoothed_finite_sum(sp);
    ReferenceOptions opts;
    opts.tolerance = rexp.reference_tol;
    opts.cd_polish = false;
    saddle_reference =
        reference_optimum(smooth, opts, Vector(rexp.data.dims, 0.0)).value;
  }

  auto execute = [&](PreparedRun& p) {
    const auto& keys = p.spec.keys;
    const std::string solver = keys.at("solver");
    const std::uint64_t seed = static_cast<std::uint64_t>(parse_int(
        get_or(keys, "seed", std::to_string(rexp.seed)), "seed"));
    const Vector x0(rexp.data.dims, 0.0);
    SolverTrace trace;

    if (solver == "saddle") {
      const double mu = parse_double(get_or(keys, "mu",
                                            get_or(config.globals, "mu",
                                                   "0.1")),
                                     "mu");
      const SaddleProblem sp = build_saddle_problem(rexp, mu);
      SaddleConfig sc;
      sc.inner_steps = parse_int(
          get_or(keys, "m", std::to_string(rexp.data.rows)), "m");
      sc.stages = parse_int(get_or(keys, "stages", "50"), "stages");
      sc.seed = seed;
      sc.sampling = parse_sampling(get_or(keys, "sampling", "uniform"));
      sc.reference_value = saddle_reference;
      trace = run_saddle(sp, sc, x0);
      p.resolved["mu"] = fmt17(mu);
      p.resolved["m"] = std::to_string(sc.inner_steps);
      p.resolved["stages"] = std::to_string(sc.stages);
    } else {
      const FiniteSumProblem problem = build_problem(rexp);
      if (solver == "asmd") {
        AsmdConfig cfg;
        cfg.inner_steps = parse_int(
            get_or(keys, "m", std::to_string(rexp.data.rows)), "m");
        cfg.stages = parse_int(get_or(keys, "stages", "50"), "stages");
        cfg.seed = seed;
        const double nu = parse_double(get_or(keys, "nu", "2"), "nu");
        const double alpha3 = parse_double(
            get_or(keys, "alpha3", "0.33333333333333333"), "alpha3");
        cfg.schedule = AlphaSchedule(nu, alpha3);
        const std::string variant = get_or(keys, "variant", "I");
        if (variant == "I") cfg.variant = AsmdConfig::Variant::I;
        else if (variant == "II") cfg.variant = AsmdConfig::Variant::II;
        else if (variant == "blend") cfg.variant = AsmdConfig::Variant::Blend;
        else
          throw std::runtime_error("unknown variant '" + variant +
                                   "' (valid: I, II, blend)");
        cfg.blend_lambda =
            parse_double(get_or(keys, "blend_lambda", "0.5"), "blend_lambda");
        const std::string ek = get_or(keys, "epsilon_kind", "exact");
        if (ek == "exact") cfg.epsilon = EpsilonSchedule::exact();
        else if (ek == "fixed")
          cfg.epsilon = EpsilonSchedule::fixed(
              parse_double(get_or(keys, "epsilon0", "0.001"), "epsilon0"));
        else if (ek == "power")
          cfg.epsilon = EpsilonSchedule::decaying(
              parse_double(get_or(keys, "epsilon0", "0.001"), "epsilon0"),
              parse_double(get_or(keys, "epsilon_p", "4"), "epsilon_p"));
        else
          throw std::runtime_error("unknown epsilon_kind '" + ek +
                                   "' (valid: exact, fixed, power)");
        if (rexp.penalty == "overlap" &&
            cfg.epsilon.kind == EpsilonSchedule::Kind::Exact)
          throw std::runtime_error(
              "the overlap penalty has no exact prox; pick epsilon_kind = "
              "fixed or power");
        cfg.sampling = parse_sampling(get_or(keys, "sampling", "uniform"));
        const std::string xt = get_or(keys, "xtilde", "average");
        if (xt == "average") cfg.xtilde_rule = AsmdConfig::XTildeRule::Average;
        else if (xt == "best") cfg.xtilde_rule = AsmdConfig::XTildeRule::Best;
        else
          throw std::runtime_error("unknown xtilde rule '" + xt +
                                   "' (valid: average, best)");
        cfg.reference_value = reference;
        trace = run_asmd(problem, cfg, x0);
        p.resolved["m"] = std::to_string(cfg.inner_steps);
        p.resolved["stages"] = std::to_string(cfg.stages);
        p.resolved["nu"] = fmt17(nu);
        p.resolved["alpha3"] = fmt17(alpha3);
        p.resolved["variant"] = variant;
        p.resolved["epsilon_kind"] = ek;
      } else if (solver == "fista" || solver == "apg") {
        AccelOptions opts;
        opts.steps = parse_int(get_or(keys, "steps", "1000"), "steps");
        opts.prox_epsilon = parse_double(
            get_or(keys, "prox_epsilon",
                   fmt17(inexact_default_eps(rexp))),
            "prox_epsilon");
        opts.reference_value = reference;
        trace = solver == "fista" ? run_fista(problem, opts, x0)
                                  : run_apg(problem, opts, x0);
        p.resolved["steps"] = std::to_string(opts.steps);
        p.resolved["prox_epsilon"] = fmt17(opts.prox_epsilon);
      } else if (solver == "pgd") {
        PgdOptions opts;
        opts.steps = parse_int(get_or(keys, "steps", "1000"), "steps");
        opts.reference_value = reference;
        trace = run_pgd(problem, opts, x0);
        p.resolved["steps"] = std::to_string(opts.steps);
      } else if (solver == "spgd") {
        SpgdOptions opts;
        opts.steps = parse_int(
            get_or(keys, "steps",
                   std::to_string(50 * rexp.data.rows)),
            "steps");
        opts.gamma0 = parse_double(get_or(keys, "gamma0", "0"), "gamma0");
        opts.seed = seed;
        opts.reference_value = reference;
        trace = run_spgd(problem, opts, x0);
        p.resolved["steps"] = std::to_string(opts.steps);
      }
    }
    p.resolved["solver"] = solver;
    p.resolved["seed"] = std::to_string(seed);
    CsvOptions csv;
    csv.timings = options.timings;
    write_trace_csv(trace, p.csv_path, csv);
  };

  // Independent runs, dispatched across up to `threads` workers.
  const int workers = std::max(1, options.threads);
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(prepared.size());
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= prepared.size()) break;
      try {
        execute(prepared[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers == 1 || prepared.size() <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  // Manifest: every parameter needed to regenerate the experiment.
  const std::string manifest_tmp = options.out_dir + "/manifest.txt.tmp";
  const std::string manifest_path = options.out_dir + "/manifest.txt";
  {
    std::ofstream out(manifest_tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + manifest_tmp);
    for (const auto& [k, v] : config.globals) out << k << " = " << v << '\n';
    out << "rows = " << rexp.data.rows << '\n';
    out << "dims = " << rexp.data.dims << '\n';
    if (reference) out << "reference_value = " << fmt17(*reference) << '\n';
    if (saddle_reference)
      out << "saddle_reference_value = " << fmt17(*saddle_reference) << '\n';
    for (const auto& p : prepared) {
      out << "\n[run " << p.spec.label << "]\n";
      for (const auto& [k, v] : p.spec.keys) out << k << " = " << v << '\n';
      for (const auto& [k, v] : p.resolved)
        if (p.spec.keys.count(k) == 0) out << k << " = " << v << '\n';
      out << "csv = " << sanitize(p.spec.label) << ".csv\n";
    }
    if (!out) throw std::runtime_error("failed writing " + manifest_tmp);
  }
  std::filesystem::rename(manifest_tmp, manifest_path);

  std::vector<std::string> written;
  written.push_back(manifest_path);
  for (const auto& p : prepared) written.push_back(p.csv_path);
  return written;
}

}  // namespace asmd
