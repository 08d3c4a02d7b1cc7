#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "asmd/bench.hpp"
#include "asmd/data_io.hpp"

using namespace asmd;

namespace {

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    path = std::filesystem::temp_directory_path() /
           ("asmd_bench_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

SolverTrace power_trace(double c, double p, std::int64_t stages) {
  SolverTrace trace;
  trace.components = 1;
  for (std::int64_t s = 1; s <= stages; ++s) {
    TraceRecord r;
    r.stage = s;
    r.objective = c / std::pow(static_cast<double>(s), p);
    r.gap = r.objective;
    trace.records.push_back(r);
  }
  return trace;
}

}  // namespace

TEST_CASE("rate fitting recovers exact power laws") {
  CHECK(fit_rate(power_trace(3.0, 2.0, 60), 5, 50) ==
        doctest::Approx(-2.0).epsilon(1e-6));
  CHECK(fit_rate(power_trace(0.7, 1.0, 60), 5, 50) ==
        doctest::Approx(-1.0).epsilon(1e-6));

  CHECK_THROWS_AS(fit_rate(power_trace(1.0, 2.0, 6), 1, 4),
                  std::invalid_argument);
  auto bad = power_trace(1.0, 2.0, 20);
  bad.records[7].gap = -1e-3;
  CHECK_THROWS_AS(fit_rate(bad, 1, 20), std::invalid_argument);
  auto no_gap = power_trace(1.0, 2.0, 20);
  for (auto& r : no_gap.records) r.gap.reset();
  CHECK_THROWS_AS(fit_rate(no_gap, 1, 20), std::invalid_argument);
}

TEST_CASE("reference optimum on closed-form instances") {
  // 1-d quadratic: minimum value is zero at the interpolating point.
  Dataset data;
  data.rows = 1;
  data.dims = 1;
  data.features = {2.0};
  data.labels = {1.0};
  auto quad = build_lasso_problem(data, 0.0);
  ReferenceOptions opts;
  opts.tolerance = 1e-12;
  const auto ref = reference_optimum(quad, opts, {0.0});
  CHECK(ref.value <= 1e-10);
  CHECK(std::fabs(ref.point[0] - 0.5) <= 1e-5);

  // Large enough l1 weight makes the origin optimal.
  const auto synth = generate_synthetic_lasso(30, 4, 8);
  auto p0 = build_lasso_problem(synth.data, 0.0);
  const Vector g0 = full_gradient(p0, Vector(4, 0.0));
  const double lambda = 1.01 * max_abs(g0);
  auto lasso = build_lasso_problem(synth.data, lambda);
  const auto ref0 = reference_optimum(lasso, opts, Vector(4, 0.0));
  CHECK(norm(ref0.point) <= 1e-9);
}

TEST_CASE("apg and coordinate descent references agree") {
  const auto synth = generate_synthetic_lasso(60, 5, 12);
  auto problem = build_lasso_problem(synth.data, 0.1);
  const double tol = 1e-10;

  ReferenceOptions apg_only;
  apg_only.tolerance = tol;
  apg_only.cd_polish = false;
  const auto apg = reference_optimum(problem, apg_only, Vector(5, 0.0));
  const auto cd =
      coordinate_descent_reference(problem, Vector(5, 0.0), tol, 100000);
  CHECK(std::fabs(apg.value - cd.value) <= 10.0 * tol);
}

TEST_CASE("reference optimum errors out of budget with the best value") {
  const auto synth = generate_synthetic_lasso(40, 5, 21);
  auto problem = build_lasso_problem(synth.data, 0.1);
  ReferenceOptions opts;
  opts.tolerance = 1e-16;  // unreachable change threshold
  opts.max_apg_iterations = 10;
  try {
    (void)reference_optimum(problem, opts, Vector(5, 0.0));
    CHECK(false);
  } catch (const ConvergenceError& e) {
    CHECK(std::isfinite(e.best_value()));
  }
}

TEST_CASE("config parser handles sections, comments, and errors") {
  TempDir tmp("cfg");
  const auto path = tmp.file("exp.cfg");
  {
    std::ofstream out(path);
    out << "# comment\n";
    out << "dataset = synthetic\n";
    out << "N = 30\nD = 4\nseed = 5\n";
    out << "\n[run first]\nsolver = asmd\nstages = 3\n";
    out << "[run second]\nsolver = fista\nsteps = 10\n";
  }
  const auto cfg = parse_experiment_config(path);
  CHECK(cfg.globals.at("dataset") == "synthetic");
  REQUIRE(cfg.runs.size() == 2);
  CHECK(cfg.runs[0].label == "first");
  CHECK(cfg.runs[1].keys.at("solver") == "fista");

  const auto dup = tmp.file("dup.cfg");
  {
    std::ofstream out(dup);
    out << "dataset = synthetic\ndataset = other\n";
  }
  CHECK_THROWS_AS(parse_experiment_config(dup), std::runtime_error);

  const auto badsec = tmp.file("sec.cfg");
  {
    std::ofstream out(badsec);
    out << "[solver foo]\n";
  }
  CHECK_THROWS_AS(parse_experiment_config(badsec), std::runtime_error);
}

TEST_CASE("experiment runner writes deterministic csvs and a manifest") {
  TempDir tmp("run");
  const auto cfg_path = tmp.file("exp.cfg");
  {
    std::ofstream out(cfg_path);
    out << "dataset = synthetic\nN = 30\nD = 4\nseed = 5\nlambda = 0.1\n";
    out << "reference_tol = 1e-10\n";
    out << "[run asmd2]\nsolver = asmd\nvariant = II\nstages = 4\nm = 30\n";
    out << "[run fista]\nsolver = fista\nsteps = 40\n";
  }
  const auto cfg = parse_experiment_config(cfg_path);
  ExperimentOptions opts;
  opts.out_dir = tmp.file("out");
  const auto written = run_experiment(cfg, opts);
  REQUIRE(written.size() == 3);  // manifest + 2 csvs

  const std::string manifest = slurp(tmp.file("out/manifest.txt"));
  CHECK(manifest.find("reference_value") != std::string::npos);
  CHECK(manifest.find("[run asmd2]") != std::string::npos);

  const std::string csv1 = slurp(tmp.file("out/asmd2.csv"));
  CHECK(csv1.rfind("stage_or_iter,grads_over_n,objective,gap,wall_ms,"
                   "max_z_norm\n",
                   0) == 0);

  // Rerun into a second directory: byte-identical artifacts.
  ExperimentOptions opts2;
  opts2.out_dir = tmp.file("out2");
  (void)run_experiment(cfg, opts2);
  CHECK(slurp(tmp.file("out2/asmd2.csv")) == csv1);
  CHECK(slurp(tmp.file("out2/fista.csv")) == slurp(tmp.file("out/fista.csv")));
  CHECK(slurp(tmp.file("out2/manifest.txt")) == manifest);

  // Threaded dispatch produces the same artifacts.
  ExperimentOptions opts3;
  opts3.out_dir = tmp.file("out3");
  opts3.threads = 2;
  (void)run_experiment(cfg, opts3);
  CHECK(slurp(tmp.file("out3/asmd2.csv")) == csv1);

  // Traces round-trip for rate fitting.
  const auto trace = read_trace_csv(tmp.file("out/asmd2.csv"));
  CHECK(trace.records.size() == 5);
  CHECK(trace.records[0].stage == 0);
  for (const auto& r : trace.records)
    if (r.gap) CHECK(*r.gap >= 1e-16);
}

TEST_CASE("experiment runner rejects unknown solvers and keys") {
  TempDir tmp("rej");
  const auto cfg_path = tmp.file("exp.cfg");
  {
    std::ofstream out(cfg_path);
    out << "dataset = synthetic\nN = 10\nD = 3\n";
    out << "[run x]\nsolver = lbfgs\n";
  }
  ExperimentOptions opts;
  opts.out_dir = tmp.file("out");
  try {
    (void)run_experiment(parse_experiment_config(cfg_path), opts);
    CHECK(false);
  } catch (const std::runtime_error& e) {
    const std::string what = e.what();
    CHECK(what.find("lbfgs") != std::string::npos);
    CHECK(what.find("asmd") != std::string::npos);  // lists valid solvers
  }

  const auto cfg2 = tmp.file("exp2.cfg");
  {
    std::ofstream out(cfg2);
    out << "dataset = synthetic\nN = 10\nD = 3\n";
    out << "[run x]\nsolver = fista\nnu = 2\n";
  }
  try {
    (void)run_experiment(parse_experiment_config(cfg2), opts);
    CHECK(false);
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("steps") != std::string::npos);
  }

  const auto cfg3 = tmp.file("exp3.cfg");
  {
    std::ofstream out(cfg3);
    out << "dataset = nowhere.libsvm\n[run x]\nsolver = fista\n";
  }
  CHECK_THROWS_AS(
      (void)run_experiment(parse_experiment_config(cfg3), opts),
      std::runtime_error);
}

TEST_CASE("empty run list produces only a manifest") {
  TempDir tmp("empty");
  const auto cfg_path = tmp.file("exp.cfg");
  {
    std::ofstream out(cfg_path);
    out << "dataset = synthetic\nN = 10\nD = 3\nreference = none\n";
  }
  ExperimentOptions opts;
  opts.out_dir = tmp.file("out");
  const auto written = run_experiment(parse_experiment_config(cfg_path), opts);
  REQUIRE(written.size() == 1);
  CHECK(std::filesystem::exists(tmp.file("out/manifest.txt")));
}

TEST_CASE("saddle runs go through the cli surface") {
  TempDir tmp("saddle");
  const auto cfg_path = tmp.file("exp.cfg");
  {
    std::ofstream out(cfg_path);
    out << "dataset = synthetic\nN = 12\nD = 3\nseed = 2\nmu = 0.1\n";
    out << "reference_tol = 1e-8\n";
    out << "[run sd]\nsolver = saddle\nm = 12\nstages = 3\n";
  }
  ExperimentOptions opts;
  opts.out_dir = tmp.file("out");
  const auto written = run_experiment(parse_experiment_config(cfg_path), opts);
  REQUIRE(written.size() == 2);
  const auto trace = read_trace_csv(tmp.file("out/sd.csv"));
  CHECK(trace.records.size() == 4);
}
