#include "harness/config.h"

#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "totalctl/mild_solver.h"
#include "totalctl/semigroup.h"

namespace totalctl::harness {
namespace {

namespace pt = boost::property_tree;

const std::set<std::string> kKnownKeys = {
    "problem.example", "problem.nodes", "problem.delay", "problem.gain",
    "problem.saturation", "problem.nonlocal_weights", "problem.nonlocal_instants",
    "problem.state_radius", "problem.seed", "problem.targets", "problem.generator",
    "problem.control", "problem.initial", "problem.semigroup_bound",
    "problem.impulse", "mesh.breakpoints", "mesh.horizon", "numerics.time_step",
    "numerics.min_steps", "numerics.history_grid", "numerics.tol",
    "numerics.max_iter", "numerics.delta_floor", "numerics.ridge",
    "numerics.window_ridge", "numerics.jobs", "numerics.tol_hit",
    "outputs.directory", "outputs.prefix"};

double parse_number(const std::string& token, const std::string& field) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(token, &used);
  } catch (const std::exception&) {
    throw ConfigError(field + ": '" + token + "' is not a number");
  }
  if (used != token.size() || !std::isfinite(value)) {
    throw ConfigError(field + ": '" + token + "' is not a finite number");
  }
  return value;
}

class Reader {
 public:
  explicit Reader(const pt::ptree& tree) : tree_(tree) {}

  std::optional<std::string> text(const std::string& key) const {
    auto v = tree_.get_optional<std::string>(key);
    if (!v) return std::nullopt;
    return *v;
  }
  double number(const std::string& key, double fallback) const {
    auto v = text(key);
    return v ? parse_number(*v, key) : fallback;
  }
  int integer(const std::string& key, int fallback) const {
    auto v = text(key);
    if (!v) return fallback;
    const double x = parse_number(*v, key);
    if (x != std::floor(x) || std::abs(x) > 1e9) {
      throw ConfigError(key + " must be an integer");
    }
    return static_cast<int>(x);
  }
  std::vector<double> list(const std::string& key, std::vector<double> fallback) const {
    auto v = text(key);
    return v ? parse_list(*v, key) : fallback;
  }

 private:
  const pt::ptree& tree_;
};

void require(bool condition, const std::string& message) {
  if (!condition) throw ConfigError(message);
}

std::vector<State> rows_as_states(const Eigen::MatrixXd& m) {
  std::vector<State> out;
  for (Eigen::Index r = 0; r < m.rows(); ++r) out.push_back(m.row(r).transpose());
  return out;
}

std::vector<State> random_unit_targets(int dim, int windows, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<State> out;
  for (int w = 0; w < windows; ++w) {
    State z(dim);
    for (int i = 0; i < dim; ++i) z(i) = gauss(rng);
    out.push_back(z / z.norm());
  }
  return out;
}

ProblemSpec build_linear(const RunConfig& config) {
  const LinearSetup& s = config.linear;
  const int n = config.mesh.num_impulses();
  const double b = config.mesh.horizon();
  require(s.generator.size() > 0, "problem.generator is required for the linear example");
  require(s.generator.rows() == s.generator.cols(), "problem.generator must be square");
  const int dim = static_cast<int>(s.generator.rows());
  require(s.control.rows() == dim, "problem.control must have one row per state");
  require(s.initial.size() == 0 || s.initial.size() == dim,
          "problem.initial must have one entry per state");
  require(s.impulse == "scale" || s.impulse == "zero",
          "problem.impulse must be 'scale' or 'zero'");
  require(s.state_radius > 0.0, "problem.state_radius must be positive");

  double bound = 1.0;
  if (s.semigroup_bound) {
    require(*s.semigroup_bound >= 1.0, "problem.semigroup_bound must be >= 1");
    bound = *s.semigroup_bound;
  }
  auto semigroup = std::make_shared<MatrixExponentialSemigroup>(s.generator, bound);
  if (!s.semigroup_bound) {
    std::vector<double> grid;
    for (int i = 0; i <= 200; ++i) grid.push_back(b * i / 200.0);
    bound = std::max(1.0, growth_bound(*semigroup, grid)) * 1.01;
    semigroup = std::make_shared<MatrixExponentialSemigroup>(s.generator, bound);
  }

  ProblemSpec p;
  p.name = "linear";
  p.semigroup = semigroup;
  p.control_operator = s.control;
  p.mesh = config.mesh;
  p.delay = config.transport.delay;
  const State initial = s.initial.size() ? s.initial : State::Zero(dim);
  p.history = [initial](double) { return initial; };
  for (int j = 0; j < n; ++j) {
    if (s.impulse == "scale") {
      p.impulses.push_back([](double t, const State& x) -> State { return t * x; });
    } else {
      p.impulses.push_back([](double, const State& x) -> State {
        return State::Zero(x.size());
      });
    }
  }
  if (s.gain != 0.0) {
    const double gain = s.gain;
    p.nonlinearity = [gain](double, const HistorySegment& seg) -> State {
      return gain * seg.sample(0).array().sin().matrix();
    };
  }
  double weight_sum = 0.0;
  for (double w : s.nonlocal_weights) weight_sum += std::abs(w);
  if (weight_sum > 0.0) {
    p.nonlocal = weighted_sample_nonlocal(s.nonlocal_weights, s.nonlocal_instants, b);
  }

  auto& c = p.constants;
  c.semigroup_bound = bound;
  c.control_norm = s.control.size()
                       ? Eigen::JacobiSVD<Eigen::MatrixXd>(s.control).singularValues()(0)
                       : 0.0;
  c.delay_lipschitz = std::abs(s.gain);
  c.forcing_bound = std::abs(s.gain) * std::sqrt(static_cast<double>(dim));
  c.nonlocal_lipschitz = weight_sum;
  c.nonlocal_bound = weight_sum * s.state_radius;
  const bool scale = s.impulse == "scale";
  c.impulse_lipschitz.assign(n, scale ? b : 0.0);
  c.impulse_bound.assign(n, scale ? b * s.state_radius : 0.0);
  return p;
}

}  // namespace

std::vector<double> parse_list(const std::string& text, const std::string& field) {
  std::istringstream in(text);
  std::vector<double> out;
  std::string token;
  while (in >> token) out.push_back(parse_number(token, field));
  return out;
}

Eigen::MatrixXd parse_matrix(const std::string& text, const std::string& field) {
  std::vector<std::vector<double>> rows;
  std::stringstream in(text);
  std::string row;
  while (std::getline(in, row, ';')) {
    auto values = parse_list(row, field);
    if (!values.empty()) rows.push_back(std::move(values));
  }
  require(!rows.empty(), field + ": empty matrix");
  const std::size_t cols = rows.front().size();
  Eigen::MatrixXd m(rows.size(), cols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    require(rows[r].size() == cols, field + ": rows have different lengths");
    for (std::size_t k = 0; k < cols; ++k) m(r, k) = rows[r][k];
  }
  return m;
}

RunConfig parse_config(const std::string& text) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config syntax: ") + e.what());
  }

  RunConfig config;
  for (const auto& [section, entries] : tree) {
    require(entries.data().empty(),
            "config: key '" + section + "' must sit inside a section");
    for (const auto& [key, value] : entries) {
      const std::string full = section + "." + key;
      require(kKnownKeys.count(full) == 1, "config: unknown key " + full);
      config.echo.push_back({section, key, value.data()});
    }
  }

  const Reader r(tree);
  config.example = r.text("problem.example").value_or(config.example);
  require(config.example == "transport-case1" || config.example == "transport-case2" ||
              config.example == "linear",
          "problem.example must be transport-case1, transport-case2 or linear");

  auto& t = config.transport;
  t.nodes = r.integer("problem.nodes", t.nodes);
  require(t.nodes >= 4, "problem.nodes must be >= 4");
  t.delay = r.number("problem.delay", t.delay);
  require(t.delay > 0.0, "problem.delay must be positive");
  t.gain = r.number("problem.gain", t.gain);
  t.saturation = r.number("problem.saturation", t.saturation);
  require(t.saturation > -1.0, "problem.saturation must exceed -1");
  t.state_radius = r.number("problem.state_radius", t.state_radius);
  require(t.state_radius > 0.0, "problem.state_radius must be positive");
  const double seed = r.number("problem.seed", static_cast<double>(config.seed));
  require(seed >= 0.0 && seed == std::floor(seed), "problem.seed must be a nonnegative integer");
  config.seed = static_cast<std::uint64_t>(seed);
  t.seed = config.seed;

  const bool linear = config.example == "linear";
  const std::vector<double> no_weights;
  t.nonlocal_weights = r.list("problem.nonlocal_weights",
                              linear ? no_weights : t.nonlocal_weights);
  t.nonlocal_instants = r.list("problem.nonlocal_instants",
                               linear ? no_weights : t.nonlocal_instants);
  require(t.nonlocal_weights.size() == t.nonlocal_instants.size(),
          "problem.nonlocal_weights and problem.nonlocal_instants differ in length");

  if (auto v = r.text("problem.targets")) {
    config.targets = rows_as_states(parse_matrix(*v, "problem.targets"));
  }

  auto& l = config.linear;
  if (auto v = r.text("problem.generator")) l.generator = parse_matrix(*v, "problem.generator");
  if (auto v = r.text("problem.control")) l.control = parse_matrix(*v, "problem.control");
  if (auto v = r.text("problem.initial")) {
    auto values = parse_list(*v, "problem.initial");
    l.initial = Eigen::Map<State>(values.data(), static_cast<Eigen::Index>(values.size()));
  }
  if (r.text("problem.semigroup_bound")) {
    l.semigroup_bound = r.number("problem.semigroup_bound", 1.0);
  }
  l.impulse = r.text("problem.impulse").value_or(l.impulse);
  l.gain = linear ? r.number("problem.gain", 0.0) : 0.0;
  l.nonlocal_weights = t.nonlocal_weights;
  l.nonlocal_instants = t.nonlocal_instants;
  l.state_radius = t.state_radius;

  if (auto v = r.text("mesh.breakpoints")) {
    const auto points = parse_list(*v, "mesh.breakpoints");
    require(points.size() >= 2 && points.size() % 2 == 0,
            "mesh.breakpoints must list theta_0, theta_1, lambda_1, ..., theta_{n+1}");
    const double horizon = r.number("mesh.horizon", points.back());
    try {
      config.mesh = TimeMesh::FromBreakpoints(points, horizon);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("mesh.breakpoints: ") + e.what());
    }
  } else if (r.text("mesh.horizon")) {
    throw ConfigError("mesh.horizon given without mesh.breakpoints");
  }
  t.mesh = config.mesh;

  auto& n = config.numerics;
  n.time_step = r.number("numerics.time_step", n.time_step);
  require(n.time_step > 0.0, "numerics.time_step must be positive");
  n.min_steps = r.integer("numerics.min_steps", n.min_steps);
  require(n.min_steps >= 1, "numerics.min_steps must be >= 1");
  n.history_intervals = r.integer("numerics.history_grid", n.history_intervals);
  require(n.history_intervals >= 1, "numerics.history_grid must be >= 1");
  n.tol = r.number("numerics.tol", n.tol);
  require(n.tol > 0.0, "numerics.tol must be positive");
  n.max_iter = r.integer("numerics.max_iter", n.max_iter);
  require(n.max_iter >= 1, "numerics.max_iter must be >= 1");
  n.delta_floor = r.number("numerics.delta_floor", n.delta_floor);
  require(n.delta_floor > 0.0, "numerics.delta_floor must be positive");
  n.ridge = r.number("numerics.ridge", n.ridge);
  require(n.ridge >= 0.0, "numerics.ridge must be >= 0");
  n.window_ridge = r.list("numerics.window_ridge", {});
  for (double w : n.window_ridge) require(w >= 0.0, "numerics.window_ridge must be >= 0");
  n.jobs = r.integer("numerics.jobs", n.jobs);
  require(n.jobs >= 1, "numerics.jobs must be >= 1");
  config.tol_hit = r.number("numerics.tol_hit", config.tol_hit);
  require(config.tol_hit > 0.0, "numerics.tol_hit must be positive");

  config.output_dir = r.text("outputs.directory").value_or(config.output_dir);
  config.prefix = r.text("outputs.prefix").value_or(config.prefix);
  require(!config.output_dir.empty(), "outputs.directory must not be empty");
  require(!config.prefix.empty() && config.prefix.find('/') == std::string::npos,
          "outputs.prefix must be a plain file stem");
  return config;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

BuiltProblem build_problem(const RunConfig& config) {
  BuiltProblem built;
  try {
    if (config.example == "linear") {
      built.problem = build_linear(config);
      const int windows = config.mesh.num_control_windows();
      built.targets = config.targets
                          ? *config.targets
                          : random_unit_targets(built.problem.dim(), windows, config.seed);
    } else {
      TransportConfig t = config.transport;
      if (config.targets) t.targets = config.targets;
      built.problem = config.example == "transport-case2" ? build_case2(t) : build_case1(t);
      built.targets = transport_targets(t);
    }
    built.problem.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  require(static_cast<int>(built.targets.size()) == config.mesh.num_control_windows(),
          "problem.targets needs one row per control window");
  for (const auto& z : built.targets) {
    require(z.size() == built.problem.dim(), "problem.targets rows must match the state dimension");
  }
  return built;
}

}  // namespace totalctl::harness
