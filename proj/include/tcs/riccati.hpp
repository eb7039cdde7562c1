#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "tcs/classical.hpp"
#include "tcs/errors.hpp"
#include "tcs/io.hpp"
#include "tcs/linalg.hpp"
#include "tcs/potential.hpp"

namespace tcs {

// Matrix Riccati data Q(t) = Q1(t) + i Q2(t) along a classical trajectory,
//   Q' + Q^2 + V''[x_c(t)] = 0,  Q(0) = i b I,
// together with the running traces and the accumulated integrand of the
// packet error bound.  Samples share the classical trajectory's grid; if the
// solution leaves the guard the samples stop and blow_up_at is set.
struct RiccatiTrajectory {
  double b = 0.0;
  std::vector<double> times;
  std::vector<Eigen::MatrixXd> q1;
  std::vector<Eigen::MatrixXd> q2;
  std::vector<double> int_tr_q1;     // int tr Q1 ds
  std::vector<double> int_tr_q2;     // int tr Q2 ds
  std::vector<double> int_inv_q2_32; // int lambda_min(Q2)^{-3/2} ds
  std::optional<double> blow_up_at;

  std::size_t size() const { return times.size(); }
};

// Largest t <= t_cap with  t (1 + max(b, b^2) e^{4t} + hess_sup) < 1  and
// 2 t e^{2t} <= 1/2, found by bisection to 1e-12.  Both conditions are
// strictly increasing in t, b, hess_sup, so the result is monotone
// non-increasing in b and hess_sup.
inline double guaranteed_horizon(double b, double hess_sup, double t_cap = 10.0) {
  if (!(b > 0.0)) throw std::invalid_argument("b must be > 0");
  if (!(hess_sup >= 0.0)) throw std::invalid_argument("hess_sup must be >= 0");
  const double bb = std::max(b, b * b);
  auto feasible = [&](double t) {
    return t * (1.0 + bb * std::exp(4.0 * t) + hess_sup) <= 1.0 - 1e-12 &&
           2.0 * t * std::exp(2.0 * t) <= 0.5;
  };
  double lo = 0.0, hi = t_cap;
  if (feasible(hi)) return hi;
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    (feasible(mid) ? lo : hi) = mid;
  }
  return lo;
}

// RK4 on (Q1, Q2, traces, bound integrand) over the trajectory's own step
// sequence.  Positions at the half-step stages come from the cubic Hermite
// interpolant of (x, v), which keeps the scheme 4th order.  Q1, Q2 are
// symmetrized after every step.
inline RiccatiTrajectory integrate_riccati(const Potential& p, const ClassicalTrajectory& tr,
                                           double b, double guard = 1e6) {
  if (!(b > 0.0)) throw std::invalid_argument("b must be > 0");
  if (tr.size() < 1 || p.dim() != tr.dim) throw std::invalid_argument("bad trajectory");
  const int n = p.dim();

  RiccatiTrajectory rc;
  rc.b = b;

  Eigen::MatrixXd q1 = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd q2 = b * Eigen::MatrixXd::Identity(n, n);
  double i1 = 0.0, i2 = 0.0, j32 = 0.0;

  auto store = [&](std::size_t i) {
    rc.times.push_back(tr.times[i]);
    rc.q1.push_back(q1);
    rc.q2.push_back(q2);
    rc.int_tr_q1.push_back(i1);
    rc.int_tr_q2.push_back(i2);
    rc.int_inv_q2_32.push_back(j32);
  };
  store(0);

  struct Deriv {
    Eigen::MatrixXd dq1, dq2;
    double di1, di2, dj;
  };
  bool degenerate = false;
  auto f = [&](const Eigen::MatrixXd& a1, const Eigen::MatrixXd& a2, const Eigen::MatrixXd& hess) {
    const double lmin = lambda_min_sym(symmetrized(a2));
    if (lmin <= 0.0) degenerate = true;
    return Deriv{-a1 * a1 + a2 * a2 - hess, -(a1 * a2 + a2 * a1), a1.trace(), a2.trace(),
                 lmin > 0.0 ? 1.0 / (lmin * std::sqrt(lmin)) : 0.0};
  };

  for (std::size_t i = 0; i + 1 < tr.size(); ++i) {
    const double h = tr.times[i + 1] - tr.times[i];
    const Eigen::VectorXd xm =
        0.5 * (tr.x[i] + tr.x[i + 1]) + (h / 8.0) * (tr.v[i] - tr.v[i + 1]);
    const Eigen::MatrixXd h0 = p.hessian(tr.x[i]);
    const Eigen::MatrixXd hm = p.hessian(xm);
    const Eigen::MatrixXd h1 = p.hessian(tr.x[i + 1]);

    degenerate = false;
    const Deriv k1 = f(q1, q2, h0);
    const Deriv k2 = f(q1 + 0.5 * h * k1.dq1, q2 + 0.5 * h * k1.dq2, hm);
    const Deriv k3 = f(q1 + 0.5 * h * k2.dq1, q2 + 0.5 * h * k2.dq2, hm);
    const Deriv k4 = f(q1 + h * k3.dq1, q2 + h * k3.dq2, h1);

    q1 = symmetrized(q1 + (h / 6.0) * (k1.dq1 + 2.0 * k2.dq1 + 2.0 * k3.dq1 + k4.dq1));
    q2 = symmetrized(q2 + (h / 6.0) * (k1.dq2 + 2.0 * k2.dq2 + 2.0 * k3.dq2 + k4.dq2));
    i1 += (h / 6.0) * (k1.di1 + 2.0 * k2.di1 + 2.0 * k3.di1 + k4.di1);
    i2 += (h / 6.0) * (k1.di2 + 2.0 * k2.di2 + 2.0 * k3.di2 + k4.di2);
    j32 += (h / 6.0) * (k1.dj + 2.0 * k2.dj + 2.0 * k3.dj + k4.dj);

    if (!q1.allFinite() || !q2.allFinite()) throw NonFiniteState(tr.times[i + 1]);
    if (degenerate || lambda_min_sym(q2) <= 0.0 ||
        operator_norm_sym(q1) + operator_norm_sym(q2) > guard) {
      rc.blow_up_at = tr.times[i + 1];
      break;
    }
    store(i + 1);
  }
  return rc;
}

struct BandReport {
  double min_eig = 0.0;
  double max_eig = 0.0;
  bool holds = false;
};

// Extremal eigenvalues of Q2 over the samples with t <= t_star, checked
// against [b/2, 3b/2] with 1e-9 slack.
inline BandReport check_q2_band(const RiccatiTrajectory& rc, double t_star) {
  const double tol = 1e-12 * (1.0 + std::abs(t_star));
  if (rc.blow_up_at && *rc.blow_up_at <= t_star + tol)
    throw HorizonNotCovered("Riccati samples blow up before t_star");
  if (rc.times.empty() || rc.times.back() < t_star - tol)
    throw HorizonNotCovered("Riccati samples end before t_star");
  BandReport rep;
  rep.min_eig = std::numeric_limits<double>::infinity();
  rep.max_eig = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < rc.size() && rc.times[i] <= t_star + tol; ++i) {
    rep.min_eig = std::min(rep.min_eig, lambda_min_sym(rc.q2[i]));
    rep.max_eig = std::max(rep.max_eig, lambda_max_sym(rc.q2[i]));
  }
  rep.holds = rep.min_eig >= 0.5 * rc.b - 1e-9 && rep.max_eig <= 1.5 * rc.b + 1e-9;
  return rep;
}

// Max relative defect of det Q2 = b^N exp(-2 int tr Q1), an exact invariant
// of the flow.
inline double det_identity_residual(const RiccatiTrajectory& rc) {
  double worst = 0.0;
  const int n = rc.q1.empty() ? 1 : static_cast<int>(rc.q1.front().rows());
  for (std::size_t i = 0; i < rc.size(); ++i) {
    const double lhs = rc.q2[i].determinant();
    const double rhs = std::pow(rc.b, n) * std::exp(-2.0 * rc.int_tr_q1[i]);
    worst = std::max(worst, std::abs(lhs - rhs) / std::max(std::abs(rhs), 1e-300));
  }
  return worst;
}

inline void write_riccati_csv(std::ostream& os, const RiccatiTrajectory& rc) {
  const int n = rc.q1.empty() ? 0 : static_cast<int>(rc.q1.front().rows());
  std::vector<std::string> names{"t"};
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) names.push_back("q1_" + std::to_string(r) + std::to_string(c));
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) names.push_back("q2_" + std::to_string(r) + std::to_string(c));
  names.push_back("int_tr_q1");
  names.push_back("int_tr_q2");
  write_csv_header(os, names);
  std::vector<double> row;
  for (std::size_t i = 0; i < rc.size(); ++i) {
    row.clear();
    row.push_back(rc.times[i]);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) row.push_back(rc.q1[i](r, c));
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) row.push_back(rc.q2[i](r, c));
    row.push_back(rc.int_tr_q1[i]);
    row.push_back(rc.int_tr_q2[i]);
    write_csv_row(os, row);
  }
}

}  // namespace tcs
