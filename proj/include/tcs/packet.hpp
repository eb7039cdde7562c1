#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <stdexcept>

#include "tcs/classical.hpp"
#include "tcs/errors.hpp"
#include "tcs/grid.hpp"
#include "tcs/riccati.hpp"

namespace tcs {

// L2 normalization of exp(-|y|^2/2): C_N = (int exp(-|y|^2) dy)^{1/2}.
inline double gauss_norm_constant(int dim) {
  return std::pow(M_PI, 0.25 * dim);
}

// Moment constant of the cubic Taylor remainder,
//   (1/3!) (int |y|^6 e^{-|y|^2} dy)^{1/2} / C_N = (1/6) sqrt(N(N+2)(N+4)/8).
inline double cubic_moment_constant(int dim) {
  const double n = dim;
  return std::sqrt(n * (n + 2.0) * (n + 4.0) / 8.0) / 6.0;
}

// Gaussian packet riding a classical trajectory: all data needed to evaluate
//   psi(x) = (b^{N/4}/C_N) exp(Phi),
//   Phi = i(action_free + action_control) + i<v_c, x-x_c>
//       + (i/2) <(q1 + i q2)(x-x_c), x-x_c> - int_tr_q1/2 - i int_tr_q2/2.
struct WavePacket {
  int dim = 0;
  double b = 0.0;
  double t = 0.0;
  Eigen::VectorXd x_c, v_c;
  Eigen::MatrixXd q1, q2;
  double action_free = 0.0;
  double action_control = 0.0;
  double int_tr_q1 = 0.0;
  double int_tr_q2 = 0.0;
};

inline WavePacket packet_at(const ClassicalTrajectory& tr, const RiccatiTrajectory& rc,
                            std::size_t i) {
  if (i >= tr.size()) throw std::invalid_argument("sample index out of range");
  if (i >= rc.size()) {
    if (rc.blow_up_at) throw BlownUp(*rc.blow_up_at);
    throw GridMismatch("Riccati samples are shorter than the trajectory");
  }
  if (rc.times[i] != tr.times[i])
    throw GridMismatch("trajectory and Riccati data use different grids");
  WavePacket w;
  w.dim = tr.dim;
  w.b = rc.b;
  w.t = tr.times[i];
  w.x_c = tr.x[i];
  w.v_c = tr.v[i];
  w.q1 = rc.q1[i];
  w.q2 = rc.q2[i];
  w.action_free = tr.action_free[i];
  w.action_control = tr.action_control[i];
  w.int_tr_q1 = rc.int_tr_q1[i];
  w.int_tr_q2 = rc.int_tr_q2[i];
  return w;
}

inline ComplexField sample_packet(const WavePacket& w, const Grid& g) {
  if (g.dim() != w.dim) throw GridMismatch("packet and grid dimension differ");
  ComplexField f;
  f.grid = g;
  f.values.resize(static_cast<Eigen::Index>(g.total_points()));
  const double pref = std::pow(w.b, 0.25 * w.dim) / gauss_norm_constant(w.dim);
  const std::complex<double> im(0.0, 1.0);
  const std::complex<double> phase0 =
      im * (w.action_free + w.action_control - 0.5 * w.int_tr_q2) - 0.5 * w.int_tr_q1;
  for (std::size_t idx = 0; idx < g.total_points(); ++idx) {
    const Eigen::VectorXd d = g.point(idx) - w.x_c;
    const std::complex<double> phi = phase0 + im * w.v_c.dot(d) +
                                     0.5 * im * d.dot(w.q1 * d) - 0.5 * d.dot(w.q2 * d);
    f.values(static_cast<Eigen::Index>(idx)) = pref * std::exp(phi);
  }
  return f;
}

// |psi| integrates to 1 in closed form iff the det identity holds; useful as
// a cheap per-sample invariant.
inline double packet_norm_closed_form(const WavePacket& w) {
  return std::pow(w.b, 0.25 * w.dim) * std::exp(-0.5 * w.int_tr_q1) /
         std::pow(w.q2.determinant(), 0.25);
}

// Source term left over when the packet is driven through the exact
// equation: the cubic-and-higher Taylor tail of V at x_c times the packet.
// Quadratic potentials give the zero field exactly.
inline ComplexField residual_field(const WavePacket& w, const Potential& p, const Grid& g) {
  ComplexField f = sample_packet(w, g);
  for (std::size_t idx = 0; idx < g.total_points(); ++idx) {
    const Eigen::VectorXd x = g.point(idx);
    f.values(static_cast<Eigen::Index>(idx)) *= -p.taylor_remainder(w.x_c, x);
  }
  return f;
}

// A priori L2 gap between the packet and the exact solution at time t:
//   C* ||V'''||_inf  int_0^t ||Q2(s)^{-1}||^{3/2} ds,
// with the integral accumulated by the Riccati integrator on its own grid.
inline double error_bound(const RiccatiTrajectory& rc, const Potential& p, double t) {
  const double tol = 1e-12 * (1.0 + std::abs(t));
  if (rc.times.empty() || rc.times.back() < t - tol)
    throw HorizonNotCovered("error bound requested past the last Riccati sample");
  const int n = static_cast<int>(rc.q1.front().rows());
  const double coeff = cubic_moment_constant(n) * p.third_sup();
  auto it = std::lower_bound(rc.times.begin(), rc.times.end(), t - tol);
  const std::size_t i = static_cast<std::size_t>(it - rc.times.begin());
  if (std::abs(rc.times[i] - t) <= tol) return coeff * rc.int_inv_q2_32[i];
  if (i == 0) return coeff * rc.int_inv_q2_32[0];
  const double w = (t - rc.times[i - 1]) / (rc.times[i] - rc.times[i - 1]);
  return coeff * ((1.0 - w) * rc.int_inv_q2_32[i - 1] + w * rc.int_inv_q2_32[i]);
}

}  // namespace tcs
