#pragma once

#include <Eigen/Dense>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <mutex>
#include <random>
#include <string>
#include <thread>
#include <tuple>
#include <utility>
#include <vector>

#include "tcs/classical.hpp"
#include "tcs/control.hpp"
#include "tcs/errors.hpp"
#include "tcs/gaussian_profile.hpp"
#include "tcs/grid.hpp"
#include "tcs/packet.hpp"
#include "tcs/potential.hpp"
#include "tcs/riccati.hpp"
#include "tcs/split_step.hpp"

namespace tcs {

// Exclusion horizon: before t_double_star no admissible control can bring
// the state within delta of the target.
//   t_double_star = min{ t_star, delta0 (b/2)^{3/2} / (2 C* |V'''|_inf) },
//   delta = delta0 / 2.
// A quadratic potential has no cubic tail and the second argument is +inf.
inline std::pair<double, double> compute_t_double_star(double delta0, double b,
                                                       const Potential& p, double t_star) {
  if (!(delta0 > 1e-6))
    throw DegenerateTarget("target is Gaussian-profile up to " + std::to_string(delta0) +
                           "; no exclusion horizon exists");
  double tds = t_star;
  if (p.third_sup() > 0.0) {
    const double reach =
        delta0 * std::pow(0.5 * b, 1.5) / (2.0 * cubic_moment_constant(p.dim()) * p.third_sup());
    tds = std::min(t_star, reach);
  }
  return {tds, 0.5 * delta0};
}

struct ObstructionHorizon {
  ProfileFit fit;
  double t_star = 0.0;
  double t_double_star = 0.0;
  double delta = 0.0;
};

inline ObstructionHorizon obstruction_horizon(const ComplexField& target, const Potential& p,
                                              double b) {
  ObstructionHorizon h;
  h.fit = gaussian_set_distance(target, b);
  h.t_star = guaranteed_horizon(b, p.hess_sup());
  std::tie(h.t_double_star, h.delta) = compute_t_double_star(h.fit.delta0, b, p, h.t_star);
  return h;
}

struct NamedControl {
  std::string name;
  ControlSignal signal;
};

namespace detail {

// Uniform double in [0, 1) from the top 53 bits of the raw draw; written out
// here so the stream does not depend on the standard library's distribution
// implementation.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace detail

// Deterministic control battery: the zero control, extreme constants,
// bang-bang at a few switching counts, resonant sinusoids, then seeded
// random piecewise-constant signals until `count` entries exist.  Entry i's
// randomness is seeded with seed xor i, so the list is stable under both
// reordering of execution and changes of count.
inline std::vector<NamedControl> control_battery(int dim, double a_max, double horizon,
                                                 double resonant_freq, int count,
                                                 std::uint64_t seed) {
  if (dim < 1 || dim > 2) throw std::invalid_argument("battery supports 1 or 2 dimensions");
  if (!(a_max > 0.0) || !(horizon > 0.0))
    throw std::invalid_argument("amplitude and horizon must be > 0");
  std::vector<NamedControl> out;
  auto axis = [&](int a) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(dim);
    e(a) = 1.0;
    return e;
  };
  out.push_back({"zero", ControlSignal::zero(dim, horizon)});
  for (int a = 0; a < dim; ++a) {
    const std::string s = dim == 1 ? "" : "_x" + std::to_string(a);
    out.push_back({"const+" + s, ControlSignal::constant(a_max * axis(a), horizon)});
    out.push_back({"const-" + s, ControlSignal::constant(-a_max * axis(a), horizon)});
    for (int k : {2, 4, 8})
      out.push_back(
          {"bang" + std::to_string(k) + s, ControlSignal::bang_bang(a_max * axis(a), k, horizon)});
    if (resonant_freq > 0.0) {
      out.push_back({"sin" + s,
                     ControlSignal::sinusoid(a_max * axis(a), resonant_freq, 0.0, horizon)});
      out.push_back({"cos" + s,
                     ControlSignal::sinusoid(a_max * axis(a), resonant_freq, 0.5 * M_PI, horizon)});
    }
  }
  while (static_cast<int>(out.size()) < count) {
    const auto i = static_cast<std::uint64_t>(out.size());
    std::mt19937_64 rng(seed ^ i);
    std::vector<Eigen::VectorXd> vals;
    for (int piece = 0; piece < 8; ++piece) {
      Eigen::VectorXd v(dim);
      if (dim == 1) {
        v(0) = (2.0 * detail::uniform01(rng) - 1.0) * a_max;
      } else {
        const double r = detail::uniform01(rng) * a_max;
        const double th = detail::uniform01(rng) * 2.0 * M_PI;
        v << r * std::cos(th), r * std::sin(th);
      }
      vals.push_back(v);
    }
    out.push_back({"rand" + std::to_string(i), ControlSignal::piecewise_constant(vals, horizon)});
  }
  return out;
}

struct ExperimentSetup {
  Potential potential = Potential::zero(1);
  double b = 1.0;
  Eigen::VectorXd x0, v0;
  double dt_ode = 1e-3;
  double dt_pde = 1e-3;
  double tail_budget = 1e-10;
  int threads = 1;
};

struct TrialResult {
  std::string control_name;
  double min_distance = 0.0;
  double argmin_t = 0.0;
  double initial_distance = 0.0;
  double max_tcs_gap = 0.0;    // max over snapshots of |psi - packet|
  double max_error_bound = 0.0;
  bool bound_ok = true;        // tcs gap <= bound + 1e-5 at every snapshot
  std::vector<double> t, distance, tcs_distance, error_bound;
};

struct ObstructionReport {
  double b = 0.0;
  double delta0 = 0.0;
  double coarse_delta0 = 0.0;
  Eigen::MatrixXd argmin_q;
  Eigen::VectorXd argmin_alpha;
  double t_star = 0.0;
  double t_double_star = 0.0;
  double delta = 0.0;
  std::vector<TrialResult> trials;
  bool verdict = false;    // every trial minimum exceeds delta
  bool bounds_ok = false;  // every trial respected the a priori error bound
};

namespace detail {

// Indices into tr.times of each requested time; times must appear verbatim
// (the trajectory was integrated with them as marks).
inline std::vector<std::size_t> locate_times(const std::vector<double>& haystack,
                                             const std::vector<double>& needles) {
  std::vector<std::size_t> idx;
  idx.reserve(needles.size());
  std::size_t j = 0;
  for (double t : needles) {
    while (j < haystack.size() && haystack[j] != t) ++j;
    if (j == haystack.size()) throw std::logic_error("snapshot time missing from the ODE grid");
    idx.push_back(j);
  }
  return idx;
}

inline TrialResult run_trial(const ExperimentSetup& s, const ComplexField& target,
                             const NamedControl& ctrl, double horizon) {
  TrialResult res;
  res.control_name = ctrl.name;
  const ControlSignal u =
      ctrl.signal.horizon() > horizon * (1.0 + 1e-12) ? ctrl.signal.truncated(horizon) : ctrl.signal;
  if (u.horizon() < horizon * (1.0 - 1e-12))
    throw std::invalid_argument("control '" + ctrl.name + "' ends before the horizon");

  const std::vector<double> snaps = step_sequence(0.0, u.horizon(), s.dt_pde, u.breakpoints());
  const auto tr = integrate_newton(s.potential, u, s.x0, s.v0, s.dt_ode, snaps);
  const auto rc = integrate_riccati(s.potential, tr, s.b);
  if (rc.blow_up_at) throw BlownUp(*rc.blow_up_at);
  const auto ode_idx = locate_times(tr.times, snaps);

  WavePacket w0;
  w0.dim = s.potential.dim();
  w0.b = s.b;
  w0.x_c = s.x0;
  w0.v_c = s.v0;
  w0.q1 = Eigen::MatrixXd::Zero(w0.dim, w0.dim);
  w0.q2 = s.b * Eigen::MatrixXd::Identity(w0.dim, w0.dim);
  const ComplexField psi0 = sample_packet(w0, target.grid);

  std::size_t k = 0;
  PropagateOptions opt;
  opt.tail_budget = s.tail_budget;
  opt.observer = [&](double t, const ComplexField& state) {
    if (k >= snaps.size() || snaps[k] != t)
      throw std::logic_error("propagator steps diverged from the snapshot plan");
    const ComplexField tcs = sample_packet(packet_at(tr, rc, ode_idx[k]), target.grid);
    const double dist = l2_distance(state, target);
    const double gap = l2_distance(state, tcs);
    const double bound = error_bound(rc, s.potential, t);
    res.t.push_back(t);
    res.distance.push_back(dist);
    res.tcs_distance.push_back(l2_distance(tcs, target));
    res.error_bound.push_back(bound);
    res.max_tcs_gap = std::max(res.max_tcs_gap, gap);
    res.max_error_bound = std::max(res.max_error_bound, bound);
    if (gap > bound + 1e-5) res.bound_ok = false;
    ++k;
  };
  propagate(psi0, s.potential, u, 0.0, u.horizon(), s.dt_pde, opt);
  if (k != snaps.size()) throw std::logic_error("propagator produced fewer snapshots than planned");

  res.initial_distance = res.distance.front();
  std::size_t best = 0;
  for (std::size_t i = 1; i < res.distance.size(); ++i)
    if (res.distance[i] < res.distance[best]) best = i;
  res.min_distance = res.distance[best];
  res.argmin_t = res.t[best];
  return res;
}

}  // namespace detail

// Runs the full control battery against the target on the target's own grid
// (callers size that grid for the worst trajectory).  Trials are independent
// and may run on several threads; results land in battery order and carry no
// trace of the schedule.
inline ObstructionReport run_obstruction_experiment(const ExperimentSetup& s,
                                                    const ComplexField& target,
                                                    const std::vector<NamedControl>& controls) {
  if (controls.empty()) throw EmptyControlSet("the control battery is empty");
  if (s.potential.dim() != target.grid.dim())
    throw std::invalid_argument("potential and target dimensions differ");
  if (s.x0.size() != s.potential.dim() || s.v0.size() != s.potential.dim())
    throw std::invalid_argument("initial data dimension mismatch");

  const ObstructionHorizon h = obstruction_horizon(target, s.potential, s.b);

  ObstructionReport rep;
  rep.b = s.b;
  rep.delta0 = h.fit.delta0;
  rep.coarse_delta0 = h.fit.coarse_delta0;
  rep.argmin_q = h.fit.q;
  rep.argmin_alpha = h.fit.alpha;
  rep.t_star = h.t_star;
  rep.t_double_star = h.t_double_star;
  rep.delta = h.delta;
  rep.trials.resize(controls.size());

  const int workers = std::max(1, s.threads);
  if (workers == 1) {
    for (std::size_t i = 0; i < controls.size(); ++i)
      rep.trials[i] = detail::run_trial(s, target, controls[i], h.t_double_star);
  } else {
    std::atomic<std::size_t> next{0};
    std::mutex err_mutex;
    std::exception_ptr first_error;
    auto work = [&]() {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= controls.size()) return;
        try {
          rep.trials[i] = detail::run_trial(s, target, controls[i], h.t_double_star);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mutex);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
  }

  rep.verdict = true;
  rep.bounds_ok = true;
  for (const auto& tr : rep.trials) {
    if (!(tr.min_distance > rep.delta)) rep.verdict = false;
    if (!tr.bound_ok) rep.bounds_ok = false;
  }
  return rep;
}

}  // namespace tcs
