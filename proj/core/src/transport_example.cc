#include "totalctl/transport_example.h"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "totalctl/mild_solver.h"

namespace totalctl {
namespace {

void require(bool condition, const char* message) {
  if (!condition) throw std::invalid_argument(message);
}

double abs_sum(const std::vector<double>& weights) {
  double sum = 0.0;
  for (double w : weights) sum += std::abs(w);
  return sum;
}

// Pieces shared by both cases: semigroup, B = I, impulses t*x, history.
ProblemSpec transport_base(const TransportConfig& cfg) {
  cfg.validate();
  const double b = cfg.mesh.horizon();
  const int n = cfg.mesh.num_impulses();

  ProblemSpec p;
  p.semigroup = shift_semigroup(cfg.nodes);
  p.control_operator = Eigen::MatrixXd::Identity(cfg.nodes, cfg.nodes);
  p.mesh = cfg.mesh;
  p.delay = cfg.delay;
  p.history = transport_history(cfg.nodes);
  for (int j = 0; j < n; ++j) {
    p.impulses.push_back([](double t, const State& x) -> State { return t * x; });
  }

  auto& c = p.constants;
  c.semigroup_bound = 1.0;
  c.control_norm = 1.0;
  c.impulse_lipschitz.assign(n, b);
  c.impulse_bound.assign(n, b * cfg.state_radius);
  return p;
}

}  // namespace

void TransportConfig::validate() const {
  require(nodes >= 4, "transport: nodes must be >= 4");
  require(delay > 0.0 && std::isfinite(delay), "transport: delay must be positive");
  require(saturation > -1.0, "transport: saturation must exceed -1");
  require(std::isfinite(gain), "transport: gain must be finite");
  require(state_radius > 0.0, "transport: state_radius must be positive");
  require(nonlocal_weights.size() == nonlocal_instants.size(),
          "transport: nonlocal weights and instants differ in length");
  for (double t : nonlocal_instants) {
    require(t >= 0.0 && t <= mesh.horizon(),
            "transport: nonlocal instant outside [0, b]");
  }
  if (targets) {
    require(static_cast<int>(targets->size()) == mesh.num_control_windows(),
            "transport: need one target per control window");
    for (const auto& z : *targets) {
      require(z.size() == nodes, "transport: target size differs from nodes");
    }
  }
}

std::shared_ptr<const ShiftSemigroup> shift_semigroup(int nodes) {
  return std::make_shared<const ShiftSemigroup>(nodes);
}

HistoryData transport_history(int nodes) {
  const double dx = std::numbers::pi / nodes;
  return [nodes, dx](double t) {
    State v(nodes);
    for (int i = 0; i < nodes; ++i) v(i) = std::sin(dx * i) * (1.0 + t);
    return v;
  };
}

ProblemSpec build_case1(const TransportConfig& cfg) {
  ProblemSpec p = transport_base(cfg);
  p.name = "transport-case1";
  const double gain = cfg.gain;
  if (gain != 0.0) {
    p.nonlinearity = [gain](double, const HistorySegment& seg) -> State {
      return gain * seg.sample(0).array().sin().matrix();
    };
  }
  if (abs_sum(cfg.nonlocal_weights) > 0.0) {
    p.nonlocal = weighted_sample_nonlocal(cfg.nonlocal_weights, cfg.nonlocal_instants,
                                          cfg.mesh.horizon());
  }
  auto& c = p.constants;
  c.delay_lipschitz = std::abs(gain);
  // |gain sin(.)| <= |gain| pointwise, so the L^2(0, pi) norm is at most
  // |gain| sqrt(pi).
  c.forcing_bound = std::abs(gain) * std::sqrt(std::numbers::pi);
  c.nonlocal_lipschitz = abs_sum(cfg.nonlocal_weights);
  c.nonlocal_bound = c.nonlocal_lipschitz * cfg.state_radius;
  return p;
}

ProblemSpec build_case2(const TransportConfig& cfg) {
  ProblemSpec p = transport_base(cfg);
  p.name = "transport-case2";
  const double a = cfg.saturation;
  const double b = cfg.mesh.horizon();
  ConvolutionKernel kernel;
  kernel.kernel = [b](double s) { return (s >= 0.0 && s <= b) ? s : 0.0; };
  kernel.integrand = [a](double t, const HistorySegment& seg) -> State {
    const Eigen::ArrayXd z = seg.sample(0).array().abs();
    const double scale = std::exp(-t) / (a + 2.0 * std::exp(t));
    return (scale * z / (1.0 + 2.0 * z)).matrix();
  };
  p.kernel = std::move(kernel);
  auto& c = p.constants;
  c.kernel_lipschitz = 1.0 / (a + 2.0);
  c.kernel_bound = 1.0;
  return p;
}

std::vector<State> smooth_random_targets(int nodes, int windows, std::uint64_t seed) {
  if (nodes < 1 || windows < 1) {
    throw std::invalid_argument("targets: nodes and windows must be positive");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> coeff(0.0, 1.0);
  const double dx = std::numbers::pi / nodes;
  const StateNorm norm(dx);
  constexpr int kModes = 4;
  std::vector<State> out;
  for (int w = 0; w < windows; ++w) {
    State z = State::Zero(nodes);
    for (int k = 1; k <= kModes; ++k) {
      const double c = coeff(rng) / k;
      for (int i = 0; i < nodes; ++i) z(i) += c * std::sin(k * dx * i);
    }
    const double len = norm(z);
    if (len == 0.0) z(1) = 1.0 / std::sqrt(dx);
    else z /= len;
    out.push_back(std::move(z));
  }
  return out;
}

std::vector<State> transport_targets(const TransportConfig& cfg) {
  if (cfg.targets) return *cfg.targets;
  return smooth_random_targets(cfg.nodes, cfg.mesh.num_control_windows(), cfg.seed);
}

}  // namespace totalctl
