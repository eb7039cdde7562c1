#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <complex>
#include <functional>
#include <vector>

#include "tcs/classical.hpp"
#include "tcs/control.hpp"
#include "tcs/errors.hpp"
#include "tcs/fft.hpp"
#include "tcs/grid.hpp"
#include "tcs/potential.hpp"

namespace tcs {

struct PropagateOptions {
  double tail_budget = 1e-10;
  // Called with (t, state) at t0 and after every step.
  std::function<void(double, const ComplexField&)> observer;
};

struct PropagateResult {
  ComplexField state;
  double max_norm_drift = 0.0;  // max per-step relative change of the L2 norm
  double max_tail_mass = 0.0;
};

// Strang splitting for i dpsi/dt = (-Laplace/2 + V(x) - <E(t), x>) psi on a
// periodic box: half potential step with E frozen at the step midpoint, full
// kinetic step in Fourier space, half potential step.  Steps never straddle
// control breakpoints, so the midpoint always lies inside one piece.
inline PropagateResult propagate(const ComplexField& f0, const Potential& p,
                                 const ControlSignal& u, double t0, double t1, double dt,
                                 const PropagateOptions& opt = {}) {
  const Grid& g = f0.grid;
  if (p.dim() != g.dim() || u.dim() != g.dim())
    throw std::invalid_argument("dimension mismatch");

  PropagateResult res;
  res.state = f0;
  Eigen::VectorXcd& psi = res.state.values;
  const std::size_t m = g.total_points();

  // Static tables: V(x) and the coordinates entering <E, x>.
  Eigen::VectorXd vpot(static_cast<Eigen::Index>(m));
  Eigen::MatrixXd coords(static_cast<Eigen::Index>(m), g.dim());
  for (std::size_t i = 0; i < m; ++i) {
    const Eigen::VectorXd x = g.point(i);
    vpot(static_cast<Eigen::Index>(i)) = p.value(x);
    coords.row(static_cast<Eigen::Index>(i)) = x.transpose();
  }
  const Eigen::VectorXd k2 = ksq_table(g);
  Fft fft(g);

  const std::vector<double> times = step_sequence(t0, t1, dt, u.breakpoints());
  Eigen::VectorXcd kin_phase(static_cast<Eigen::Index>(m));
  double kin_dt = std::numeric_limits<double>::quiet_NaN();

  auto check_tail = [&](double t) {
    const double tail = boundary_mass(res.state);
    res.max_tail_mass = std::max(res.max_tail_mass, tail);
    if (tail > opt.tail_budget) throw TailMassExceeded(t, tail);
  };
  check_tail(t0);
  if (opt.observer) opt.observer(t0, res.state);

  const std::complex<double> im(0.0, 1.0);
  for (std::size_t i = 0; i + 1 < times.size(); ++i) {
    const double t = times[i];
    const double h = times[i + 1] - t;
    const double norm_before = psi.norm();

    if (h != kin_dt) {
      for (Eigen::Index j = 0; j < kin_phase.size(); ++j)
        kin_phase(j) = std::exp(-im * (0.5 * h * k2(j)));
      kin_dt = h;
    }
    const Eigen::VectorXd e = u.eval(t + 0.5 * h);
    const Eigen::VectorXd w = vpot - coords * e;
    for (Eigen::Index j = 0; j < psi.size(); ++j) psi(j) *= std::exp(-im * (0.5 * h * w(j)));
    fft.forward(psi);
    psi.array() *= kin_phase.array();
    fft.inverse(psi);
    for (Eigen::Index j = 0; j < psi.size(); ++j) psi(j) *= std::exp(-im * (0.5 * h * w(j)));

    if (!psi.allFinite()) throw NonFiniteState(times[i + 1]);
    res.max_norm_drift =
        std::max(res.max_norm_drift, std::abs(psi.norm() / norm_before - 1.0));
    check_tail(times[i + 1]);
    if (opt.observer) opt.observer(times[i + 1], res.state);
  }
  return res;
}

// Box and resolution rule for packet runs: the hull of the classical centers
// (plus any extra support points) padded by 8 (b/2)^{-1/2} per side and
// rounded outward to integers; the spacing resolves both the narrowest
// certified packet width, sigma_min/6 with sigma_min = (3b/2)^{-1/2}, and the
// largest momentum content v_max + 8 sigma_k.
inline Grid recommended_grid(double b, const std::vector<ClassicalTrajectory>& trajs,
                             const std::vector<Eigen::VectorXd>& extra_points = {},
                             int min_points_per_axis = 0, int max_points_per_axis = 8192) {
  if (trajs.empty() && extra_points.empty())
    throw std::invalid_argument("need at least one trajectory or support point");
  const int dim = trajs.empty() ? static_cast<int>(extra_points.front().size()) : trajs.front().dim;
  if (dim < 1 || dim > 2) throw std::invalid_argument("grids are 1- or 2-dimensional");

  Eigen::VectorXd lo = Eigen::VectorXd::Constant(dim, std::numeric_limits<double>::infinity());
  Eigen::VectorXd hi = -lo;
  double v_max = 0.0;
  for (const auto& tr : trajs) {
    for (std::size_t i = 0; i < tr.size(); ++i) {
      lo = lo.cwiseMin(tr.x[i]);
      hi = hi.cwiseMax(tr.x[i]);
      v_max = std::max(v_max, tr.v[i].norm());
    }
  }
  for (const auto& x : extra_points) {
    lo = lo.cwiseMin(x);
    hi = hi.cwiseMax(x);
  }

  const double pad = 8.0 * std::sqrt(2.0 / b);
  for (int a = 0; a < dim; ++a) {
    lo(a) = std::floor(lo(a) - pad);
    hi(a) = std::ceil(hi(a) + pad);
  }

  const double sigma_min = 1.0 / std::sqrt(1.5 * b);
  const double sigma_k = std::sqrt((1.0 + 2.25 * b * b) / b);
  const double k_max = v_max + 8.0 * sigma_k;
  const double h_needed = std::min(sigma_min / 6.0, M_PI / (1.25 * k_max));

  std::vector<int> pts(dim);
  for (int a = 0; a < dim; ++a) {
    int n = 2;
    while ((hi(a) - lo(a)) / n > h_needed && n < max_points_per_axis) n *= 2;
    pts[a] = std::max(n, min_points_per_axis);
  }
  return Grid(lo, hi, pts);
}

}  // namespace tcs
