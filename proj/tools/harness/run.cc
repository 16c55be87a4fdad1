#include "harness/run.h"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>

#include "harness/csv_io.h"
#include "totalctl/certificates.h"
#include "totalctl/errors.h"
#include "totalctl/oracle.h"

namespace totalctl::harness {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

constexpr int kAssumptionSamples = 50;

Json vector_json(const std::vector<double>& v) {
  Json out = Json::array();
  for (double x : v) out.push_back(x);
  return out;
}

Json state_json(const State& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

const char* variant_name(ProblemVariant v) {
  return v == ProblemVariant::kIntegro ? "integro" : "semilinear";
}

Json config_echo(const RunConfig& config) {
  Json echo = Json::object();
  for (const auto& e : config.echo) echo[e.section][e.key] = e.value;
  return echo;
}

Json problem_json(const ProblemSpec& p) {
  const auto& c = p.constants;
  Json j;
  j["name"] = p.name;
  j["variant"] = variant_name(p.variant());
  j["state_dim"] = p.dim();
  j["control_dim"] = p.control_dim();
  j["delay"] = p.delay;
  j["horizon"] = p.mesh.horizon();
  j["mesh"] = {{"theta", vector_json(p.mesh.theta())},
               {"lambda", vector_json(p.mesh.lambda())}};
  j["constants"] = {{"semigroup_bound", c.semigroup_bound},
                    {"control_norm", c.control_norm},
                    {"delay_lipschitz", c.delay_lipschitz},
                    {"forcing_bound", c.forcing_bound},
                    {"nonlocal_lipschitz", c.nonlocal_lipschitz},
                    {"nonlocal_bound", c.nonlocal_bound},
                    {"kernel_lipschitz", c.kernel_lipschitz},
                    {"kernel_bound", c.kernel_bound},
                    {"impulse_lipschitz", vector_json(c.impulse_lipschitz)},
                    {"impulse_bound", vector_json(c.impulse_bound)}};
  return j;
}

Json gramians_json(const Discretization& disc) {
  Json out = Json::array();
  for (const auto& g : disc.gramians()) {
    out.push_back({{"window", g.window},
                   {"min_eig", g.min_eig},
                   {"ridge", g.ridge},
                   {"floor", g.delta_floor},
                   {"invertible", g.invertible()}});
  }
  return out;
}

Json certificate_json(const Certificate& cert) {
  Json j;
  j["variant"] = variant_name(cert.variant);
  j["gamma"] = cert.gamma;
  j["semigroup_bound"] = cert.semigroup_bound;
  j["control_norm"] = cert.control_norm;
  j["delta"] = vector_json(cert.delta);
  j["kernel_mass"] = cert.kernel_mass;
  j["contraction"] = {{"value", cert.contraction.value},
                      {"branch", to_string(cert.contraction.branch)},
                      {"window", cert.contraction.window}};
  j["control_bounds"] = vector_json(cert.control_bounds);
  j["solution_bound"] = cert.solution_bound;
  j["verdict"] = cert.verdict;
  return j;
}

Json assumptions_json(const Discretization& disc, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const auto est = sample_constants(disc, kAssumptionSamples, rng);
  Json j;
  j["samples"] = kAssumptionSamples;
  j["delay_lipschitz"] = est.delay_lipschitz;
  j["forcing_bound"] = est.forcing_bound;
  j["kernel_lipschitz"] = est.kernel_lipschitz;
  j["kernel_bound"] = est.kernel_bound;
  j["nonlocal_lipschitz"] = est.nonlocal_lipschitz;
  j["impulse_lipschitz"] = vector_json(est.impulse_lipschitz);
  j["warnings"] = est.warnings;
  return j;
}

class Stopwatch {
 public:
  double lap() {
    const auto now = Clock::now();
    const double s = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    return s;
  }

 private:
  Clock::time_point last_{Clock::now()};
};

void write_json(const std::string& path, const Json& report) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << report.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed for " + path);
}

std::string join(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

}  // namespace

const char* to_string(Command command) {
  switch (command) {
    case Command::kCertify: return "certify";
    case Command::kOracle: return "oracle";
    case Command::kSolve: break;
  }
  return "solve";
}

std::string resolve_output_dir(const RunConfig& config, const RunOptions& options) {
  if (options.out_dir) return *options.out_dir;
  if (const char* env = std::getenv("TOTALCTL_OUT_DIR"); env && *env) return env;
  return config.output_dir;
}

RunResult run_command(Command command, const RunConfig& config_in,
                      const RunOptions& options) {
  RunResult result;
  RunConfig config = config_in;
  if (options.jobs) config.numerics.jobs = *options.jobs;

  Json& report = result.report;
  report["tool"] = "totalctl";
  report["command"] = to_string(command);
  report["seed"] = config.seed;
  report["config"] = config_echo(config);
  Json timings = Json::object();
  Stopwatch watch;

  const std::string dir = resolve_output_dir(config, options);
  if (options.write_files) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
      result.code = kExitConfig;
      result.message = "outputs.directory " + dir + " is not writable";
      return result;
    }
  }
  const std::string stem = join(dir, config.prefix);
  const std::string report_path = stem + "_report.json";

  auto finish = [&](int code, std::string message) {
    result.code = code;
    result.message = std::move(message);
    report["status"] = {{"code", code}, {"message", result.message}};
    if (options.timing) report["timings"] = timings;
    if (options.write_files) {
      write_json(report_path, report);
      result.report_path = report_path;
    }
    return result;
  };

  BuiltProblem built;
  try {
    built = build_problem(config);
    if (command == Command::kOracle &&
        (!built.problem.is_linear() || !built.problem.semigroup->generator())) {
      throw ConfigError("oracle needs a linear problem with a generator matrix");
    }
  } catch (const ConfigError& e) {
    result.code = kExitConfig;
    result.message = e.what();
    return result;
  }
  report["problem"] = problem_json(built.problem);
  Json targets = Json::array();
  for (const auto& z : built.targets) targets.push_back(state_json(z));
  report["targets"] = targets;

  std::optional<Discretization> disc;
  try {
    disc.emplace(built.problem, config.numerics);
  } catch (const std::invalid_argument& e) {
    result.code = kExitConfig;
    result.message = e.what();
    return result;
  }
  timings["discretize"] = watch.lap();
  report["gramians"] = gramians_json(*disc);

  const Certificate cert = certify(*disc, built.targets);
  report["certificate"] = certificate_json(cert);
  report["assumption_check"] = assumptions_json(*disc, config.seed);
  timings["certify"] = watch.lap();

  for (const auto& g : disc->gramians()) {
    if (!g.invertible()) {
      NotInvertible err(g.window, g.realized_floor(), g.delta_floor);
      return finish(kExitNotInvertible, err.what());
    }
  }
  if (command == Command::kCertify) return finish(kExitOk, "certificate computed");

  std::optional<SolveReport> solve_report;
  try {
    solve_report.emplace(picard_solve(*disc, built.targets));
  } catch (const NonConvergence& e) {
    report["solve"] = {{"converged", false},
                       {"iterations", e.iterations()},
                       {"final_update", e.final_update()},
                       {"measured_ratio", e.measured_ratio()},
                       {"contraction_constant", cert.contraction.value}};
    return finish(kExitNonConvergence, e.what());
  } catch (const NotInvertible& e) {
    return finish(kExitNotInvertible, e.what());
  }
  timings["solve"] = watch.lap();
  const SolveReport& solved = *solve_report;

  const auto again = evaluate_operator(*disc, solved.trajectory, built.targets);
  const auto& problem = disc->problem();
  const State start_gap = solved.trajectory.right_limit(0.0) - problem.history(0.0) -
                          (problem.variant() == ProblemVariant::kSemilinear
                               ? nonlocal_term(solved.trajectory, problem)
                               : State::Zero(problem.dim()));
  Json solve;
  solve["converged"] = solved.converged;
  solve["iterations"] = solved.iterations;
  solve["final_update"] = solved.final_update;
  solve["measured_ratio"] = solved.measured_ratio;
  solve["updates"] = vector_json(solved.updates);
  solve["per_window_defect"] = vector_json(solved.per_window_defect);
  solve["fixed_point_residual"] = pc_norm(again.trajectory - solved.trajectory);
  solve["initial_condition_gap"] = problem.norm()(start_gap);
  solve["state_sup"] = pc_norm(solved.trajectory);
  Json window_sup = Json::array();
  for (int j = 0; j < problem.mesh.num_control_windows(); ++j) {
    window_sup.push_back(solved.control.window_sup(j));
  }
  solve["control_sup"] = window_sup;
  report["solve"] = solve;

  const TargetVerdict verdict = verify_targets(solved, built.targets, config.tol_hit);
  Json hits = Json::array();
  for (bool h : verdict.hit) hits.push_back(h);
  report["verdict"] = {{"tol_hit", config.tol_hit},
                       {"defects", vector_json(verdict.defects)},
                       {"hit", hits},
                       {"totally_controllable", verdict.totally_controllable},
                       {"exactly_controllable", verdict.exactly_controllable},
                       {"first_miss", verdict.first_miss}};

  std::optional<PiecewiseTrajectory> oracle;
  if (problem.is_linear() && problem.semigroup->generator()) {
    oracle = oracle_linear(*disc, solved.control);
    report["oracle"] = {{"method", "rk4"},
                        {"refinement", 10},
                        {"max_deviation", pc_norm(solved.trajectory - *oracle)}};
    timings["oracle"] = watch.lap();
  }

  if (options.write_files) {
    Json outputs;
    write_trajectory_csv(stem + "_trajectory.csv", solved.trajectory, &solved.control);
    write_control_csv(stem + "_control.csv", solved.control);
    outputs["trajectory"] = config.prefix + "_trajectory.csv";
    outputs["control"] = config.prefix + "_control.csv";
    if (command == Command::kOracle && oracle) {
      write_trajectory_csv(stem + "_oracle.csv", *oracle, &solved.control);
      outputs["oracle"] = config.prefix + "_oracle.csv";
    }
    outputs["report"] = config.prefix + "_report.json";
    report["outputs"] = outputs;
    timings["emit"] = watch.lap();
  }

  if (!verdict.totally_controllable) {
    return finish(kExitTargetsMissed,
                  "converged but window " + std::to_string(verdict.first_miss) +
                      " missed its target");
  }
  return finish(kExitOk, "converged; every target hit");
}

int run_file(Command command, const std::string& config_path, const RunOptions& options,
             std::ostream& out, std::ostream& err) {
  RunResult result;
  try {
    result = run_command(command, load_config(config_path), options);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  if (result.code == kExitOk) {
    out << result.message << '\n';
  } else {
    err << (result.code == kExitConfig ? "config error: " : "") << result.message << '\n';
  }
  if (!result.report_path.empty()) out << "report: " << result.report_path << '\n';
  return result.code;
}

}  // namespace totalctl::harness
