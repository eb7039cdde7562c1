#pragma once

// Declarative run description: a config file names the potential, packet,
// drive, horizon, target, and output policy; everything downstream consumes
// this struct instead of raw config keys.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tcs/config.hpp"
#include "tcs/control.hpp"
#include "tcs/errors.hpp"
#include "tcs/linalg.hpp"
#include "tcs/potential.hpp"

namespace tcs {

enum class HorizonMode { fixed, t_star, t_double_star };

struct ControlSpec {
  std::string kind = "zero";
  int dim = 1;
  Eigen::VectorXd amplitude;            // constant / sinusoid / bang_bang
  double angular_freq = 1.0;            // sinusoid
  double phase = 0.0;                   // sinusoid
  Eigen::VectorXd value0, slope;        // linear
  int switchings = 1;                   // bang_bang
  std::vector<Eigen::VectorXd> values;  // piecewise

  ControlSignal build(double horizon) const {
    if (kind == "zero") return ControlSignal::zero(dim, horizon);
    if (kind == "constant") return ControlSignal::constant(amplitude, horizon);
    if (kind == "sinusoid")
      return ControlSignal::sinusoid(amplitude, angular_freq, phase, horizon);
    if (kind == "linear") return ControlSignal::linear(value0, slope, horizon);
    if (kind == "bang_bang") return ControlSignal::bang_bang(amplitude, switchings, horizon);
    if (kind == "piecewise") return ControlSignal::piecewise_constant(values, horizon);
    throw ConfigError("unknown control kind '" + kind + "'");
  }
};

struct BatterySpec {
  double amplitude = 10.0;
  int count = 16;
  double resonant_freq = -1.0;  // negative: derive from the potential curvature
};

struct TargetSpec {
  enum class Kind { none, double_bump, field_file };
  Kind kind = Kind::none;
  std::string path;
};

struct GridSpec {
  bool given = false;  // explicit box and resolution
  Eigen::VectorXd lo, hi;
  std::vector<int> points;
  int min_points = 0;  // floor per axis for automatic sizing
};

struct OutputSpec {
  std::string directory = "out";
  std::uint64_t seed = 1;
  int threads = 1;
  int snapshot_stride = 0;  // write every k-th field snapshot; 0 writes none
  double tail_budget = 1e-10;
};

struct Scenario {
  Potential potential = Potential::zero(1);
  double b = 1.0;
  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(1);
  Eigen::VectorXd v0 = Eigen::VectorXd::Zero(1);
  double dt_ode = 1e-3;
  double dt_pde = 1e-3;
  HorizonMode horizon_mode = HorizonMode::t_star;
  double horizon_time = 0.0;  // HorizonMode::fixed only
  bool has_control = false;
  ControlSpec control;
  BatterySpec battery;
  TargetSpec target;
  GridSpec grid;
  OutputSpec output;

  // Battery sinusoid frequency: explicit value, else the strongest curvature
  // of the potential at the packet start, else none for flat potentials.
  double resonant_freq() const {
    if (battery.resonant_freq >= 0.0) return battery.resonant_freq;
    const double top = lambda_max_sym(potential.hessian(x0));
    return top > 0.0 ? std::sqrt(top) : 0.0;
  }
};

namespace detail {

inline Eigen::VectorXd to_vector(const std::vector<double>& v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = v[i];
  return out;
}

inline Eigen::VectorXd sized_vector(const Config& c, const std::string& key, int dim,
                                    double fallback) {
  if (!c.has(key)) return Eigen::VectorXd::Constant(dim, fallback);
  const Eigen::VectorXd v = to_vector(c.numbers(key));
  if (v.size() != dim)
    throw ConfigError(c.origin() + ":" + std::to_string(c.line_of(key)) + ": key '" + key +
                      "': expected " + std::to_string(dim) + " entries");
  return v;
}

inline Potential parse_potential(const Config& c, int& dim) {
  const std::string kind = c.text_or("potential.kind", "zero");
  if (kind == "zero") {
    dim = static_cast<int>(c.integer_or("potential.dim", 1));
    if (dim != 1 && dim != 2) throw ConfigError("potential.dim must be 1 or 2");
    return Potential::zero(dim);
  }
  if (kind != "harmonic" && kind != "cosine_harmonic")
    throw ConfigError("potential.kind must be zero, harmonic, or cosine_harmonic");
  const std::vector<double> flat = c.numbers("potential.omega_sq");
  if (flat.size() == 1)
    dim = 1;
  else if (flat.size() == 4)
    dim = 2;
  else
    throw ConfigError("potential.omega_sq must have 1 or 4 row-major entries");
  if (c.has("potential.dim") && c.integer("potential.dim") != dim)
    throw ConfigError("potential.dim contradicts the omega_sq size");
  Eigen::MatrixXd omega(dim, dim);
  for (int r = 0; r < dim; ++r)
    for (int col = 0; col < dim; ++col) omega(r, col) = flat[static_cast<std::size_t>(r * dim + col)];
  try {
    if (kind == "harmonic") return Potential::harmonic(omega);
    const double a = c.number("potential.amplitude");
    const Eigen::VectorXd k = sized_vector(c, "potential.wavevector", dim, 0.0);
    return Potential::cosine_harmonic(omega, a, k);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(c.origin() + ": [potential] " + e.what());
  }
}

inline ControlSpec parse_control(const Config& c, int dim) {
  ControlSpec s;
  s.dim = dim;
  s.kind = c.text("control.kind");
  s.amplitude = sized_vector(c, "control.amplitude", dim, 0.0);
  s.angular_freq = c.number_or("control.angular_freq", 1.0);
  s.phase = c.number_or("control.phase", 0.0);
  s.value0 = sized_vector(c, "control.value0", dim, 0.0);
  s.slope = sized_vector(c, "control.slope", dim, 0.0);
  s.switchings = static_cast<int>(c.integer_or("control.switchings", 1));
  if (c.has("control.values")) {
    const std::vector<double> flat = c.numbers("control.values");
    if (flat.empty() || flat.size() % static_cast<std::size_t>(dim) != 0)
      throw ConfigError("control.values length must be a positive multiple of the dimension");
    const std::size_t pieces = flat.size() / static_cast<std::size_t>(dim);
    for (std::size_t p = 0; p < pieces; ++p) {
      Eigen::VectorXd v(dim);
      for (int a = 0; a < dim; ++a) v(a) = flat[p * static_cast<std::size_t>(dim) + static_cast<std::size_t>(a)];
      s.values.push_back(std::move(v));
    }
  }
  if (s.kind == "piecewise" && s.values.empty())
    throw ConfigError("control.kind = \"piecewise\" requires control.values");
  return s;
}

}  // namespace detail

inline Scenario parse_scenario(const Config& c) {
  Scenario s;
  int dim = 1;
  s.potential = detail::parse_potential(c, dim);

  s.b = c.number_or("packet.b", 1.0);
  if (!(s.b > 0.0)) throw ConfigError("packet.b must be > 0");
  s.x0 = detail::sized_vector(c, "packet.x0", dim, 0.0);
  s.v0 = detail::sized_vector(c, "packet.v0", dim, 0.0);

  s.dt_ode = c.number_or("time.dt_ode", 1e-3);
  s.dt_pde = c.number_or("time.dt_pde", 1e-3);
  if (!(s.dt_ode > 0.0) || !(s.dt_pde > 0.0)) throw ConfigError("time steps must be > 0");

  if (!c.has("time.horizon")) {
    s.horizon_mode = HorizonMode::t_star;
  } else if (c.is_number("time.horizon")) {
    s.horizon_mode = HorizonMode::fixed;
    s.horizon_time = c.number("time.horizon");
    if (!(s.horizon_time > 0.0)) throw ConfigError("time.horizon must be > 0");
  } else {
    const std::string mode = c.text("time.horizon");
    if (mode == "t_star")
      s.horizon_mode = HorizonMode::t_star;
    else if (mode == "t_double_star")
      s.horizon_mode = HorizonMode::t_double_star;
    else
      throw ConfigError("time.horizon must be a number, \"t_star\", or \"t_double_star\"");
  }

  s.has_control = c.has("control.kind");
  if (s.has_control) s.control = detail::parse_control(c, dim);

  s.battery.amplitude = c.number_or("battery.amplitude", 10.0);
  s.battery.count = static_cast<int>(c.integer_or("battery.count", 16));
  s.battery.resonant_freq = c.number_or("battery.resonant_freq", -1.0);
  if (!(s.battery.amplitude > 0.0)) throw ConfigError("battery.amplitude must be > 0");
  if (s.battery.count < 1) throw ConfigError("battery.count must be >= 1");
  if (c.has("battery.resonant_freq") && s.battery.resonant_freq < 0.0)
    throw ConfigError("battery.resonant_freq must be >= 0");

  if (c.has("target.kind")) {
    const std::string kind = c.text("target.kind");
    if (kind == "double_bump") {
      s.target.kind = TargetSpec::Kind::double_bump;
    } else if (kind == "field_file") {
      s.target.kind = TargetSpec::Kind::field_file;
      s.target.path = c.text("target.path");
    } else {
      throw ConfigError("target.kind must be double_bump or field_file");
    }
  }
  if (s.horizon_mode == HorizonMode::t_double_star && s.target.kind == TargetSpec::Kind::none)
    throw ConfigError("time.horizon = \"t_double_star\" requires a [target] section");

  const bool grid_any = c.has("grid.lo") || c.has("grid.hi") || c.has("grid.points");
  if (grid_any) {
    if (!(c.has("grid.lo") && c.has("grid.hi") && c.has("grid.points")))
      throw ConfigError("[grid] overrides need all of lo, hi, points");
    s.grid.given = true;
    s.grid.lo = detail::to_vector(c.numbers("grid.lo"));
    s.grid.hi = detail::to_vector(c.numbers("grid.hi"));
    for (double p : c.numbers("grid.points")) {
      if (p != std::floor(p)) throw ConfigError("grid.points must be integers");
      s.grid.points.push_back(static_cast<int>(p));
    }
    if (s.grid.lo.size() != dim || s.grid.hi.size() != dim ||
        s.grid.points.size() != static_cast<std::size_t>(dim))
      throw ConfigError("[grid] arrays must have one entry per dimension");
  }
  s.grid.min_points = static_cast<int>(c.integer_or("grid.min_points", 0));
  if (s.grid.min_points < 0) throw ConfigError("grid.min_points must be >= 0");

  s.output.directory = c.text_or("output.directory", "out");
  const long long seed = c.integer_or("output.seed", 1);
  if (seed < 0) throw ConfigError("output.seed must be >= 0");
  s.output.seed = static_cast<std::uint64_t>(seed);
  s.output.threads = static_cast<int>(c.integer_or("output.threads", 1));
  if (s.output.threads < 1) throw ConfigError("output.threads must be >= 1");
  s.output.snapshot_stride = static_cast<int>(c.integer_or("output.snapshot_stride", 0));
  if (s.output.snapshot_stride < 0) throw ConfigError("output.snapshot_stride must be >= 0");
  s.output.tail_budget = c.number_or("output.tail_budget", 1e-10);
  if (!(s.output.tail_budget > 0.0)) throw ConfigError("output.tail_budget must be > 0");

  const auto unused = c.unused_keys();
  if (!unused.empty()) {
    std::string msg = c.origin() + ": unrecognized keys:";
    for (const auto& k : unused) msg += " " + k;
    throw ConfigError(msg);
  }
  return s;
}

inline Scenario scenario_from_file(const std::string& path) {
  return parse_scenario(Config::parse_file(path));
}

// Printed by --print-defaults; parses back into the default scenario.
inline const char* default_config_text() {
  return R"(# Scenario file: every key with its default.  Unknown keys are errors.

[potential]
kind = "zero"            # zero | harmonic | cosine_harmonic
dim = 1                  # dimension when no matrix implies it (1 or 2)
# omega_sq = [1.0]       # row-major N x N curvature (harmonic kinds)
# amplitude = 0.1        # cosine strength (cosine_harmonic)
# wavevector = [2.0]     # cosine wavevector, N entries (cosine_harmonic)

[packet]
b = 1.0                  # initial width parameter: Q(0) = i b I
x0 = [0.0]               # initial center position, N entries
v0 = [0.0]               # initial center velocity, N entries

[time]
dt_ode = 0.001           # classical and width integrator step
dt_pde = 0.001           # propagator step, also the snapshot spacing
horizon = "t_star"       # seconds, or "t_star" / "t_double_star"

# [control]              # single drive used by propagate and check
# kind = "zero"          # zero | constant | sinusoid | linear | bang_bang | piecewise
# amplitude = [0.0]      # field vector (constant / sinusoid / bang_bang)
# angular_freq = 1.0     # sinusoid: amplitude * sin(freq * t + phase)
# phase = 0.0
# value0 = [0.0]         # linear: value0 + slope * t
# slope = [0.0]
# switchings = 1         # bang_bang sign flips
# values = [0.0]         # piecewise: flat row-major pieces x N

[battery]                # control family used by obstruct
amplitude = 10.0         # per-trial sup-norm budget
count = 16               # number of trials
# resonant_freq = 1.0    # sinusoid entries; omit to match the potential

# [target]               # required by obstruct and horizon = "t_double_star"
# kind = "double_bump"   # double_bump | field_file
# path = "target.csv"    # field_file only

[grid]                   # omit lo/hi/points to size the box automatically
# lo = [-16.0]
# hi = [16.0]
# points = [512]         # powers of two
min_points = 0           # per-axis floor for the automatic sizing

[output]
directory = "out"
seed = 1
threads = 1
snapshot_stride = 0      # write every k-th field snapshot; 0 writes none
tail_budget = 1e-10      # boundary-mass guard for the propagator
)";
}

}  // namespace tcs
