#pragma once

#include <Eigen/Dense>
#include <ostream>
#include <string>
#include <vector>

#include "tcs/control.hpp"
#include "tcs/errors.hpp"
#include "tcs/io.hpp"
#include "tcs/potential.hpp"

namespace tcs {

// Controlled classical path x'' = E(t) - grad V(x) together with the running
// action integrals, sampled on the exact step sequence of the integrator.
struct ClassicalTrajectory {
  int dim = 0;
  std::vector<double> times;
  std::vector<Eigen::VectorXd> x;
  std::vector<Eigen::VectorXd> v;
  std::vector<double> action_free;     // int (|v|^2/2 - V(x)) ds
  std::vector<double> action_control;  // int <x, E> ds

  std::size_t size() const { return times.size(); }
};

// Classic RK4 over (x, v, actions); steps never straddle a control
// breakpoint, and piece values are evaluated by their own closed form so a
// step ending on a boundary sees the one-sided limit.  extra_marks are
// additional times the sample sequence must contain verbatim, so downstream
// consumers can look rows up by exact time.
inline ClassicalTrajectory integrate_newton(const Potential& p, const ControlSignal& u,
                                            const Eigen::VectorXd& x0, const Eigen::VectorXd& v0,
                                            double dt, const std::vector<double>& extra_marks = {}) {
  const int n = p.dim();
  if (u.dim() != n || x0.size() != n || v0.size() != n)
    throw std::invalid_argument("dimension mismatch");

  ClassicalTrajectory tr;
  tr.dim = n;
  std::vector<double> marks = u.breakpoints();
  marks.insert(marks.end(), extra_marks.begin(), extra_marks.end());
  tr.times = step_sequence(0.0, u.horizon(), dt, marks);
  const std::size_t m = tr.times.size();
  tr.x.reserve(m);
  tr.v.reserve(m);
  tr.action_free.reserve(m);
  tr.action_control.reserve(m);

  Eigen::VectorXd x = x0, v = v0;
  double af = 0.0, ac = 0.0;
  tr.x.push_back(x);
  tr.v.push_back(v);
  tr.action_free.push_back(af);
  tr.action_control.push_back(ac);

  struct Deriv {
    Eigen::VectorXd dx, dv;
    double daf, dac;
  };
  std::size_t piece = 0;
  const auto& pieces = u.pieces();
  for (std::size_t i = 0; i + 1 < m; ++i) {
    const double t = tr.times[i];
    const double h = tr.times[i + 1] - t;
    while (piece + 1 < pieces.size() && t >= pieces[piece].t_end - 1e-12 * (1.0 + t)) ++piece;

    auto f = [&](double s, const Eigen::VectorXd& xs, const Eigen::VectorXd& vs) {
      const Eigen::VectorXd e = pieces[piece].eval(s);
      return Deriv{vs, e - p.gradient(xs), 0.5 * vs.squaredNorm() - p.value(xs), xs.dot(e)};
    };

    const Deriv k1 = f(t, x, v);
    const Deriv k2 = f(t + 0.5 * h, x + 0.5 * h * k1.dx, v + 0.5 * h * k1.dv);
    const Deriv k3 = f(t + 0.5 * h, x + 0.5 * h * k2.dx, v + 0.5 * h * k2.dv);
    const Deriv k4 = f(t + h, x + h * k3.dx, v + h * k3.dv);

    x += (h / 6.0) * (k1.dx + 2.0 * k2.dx + 2.0 * k3.dx + k4.dx);
    v += (h / 6.0) * (k1.dv + 2.0 * k2.dv + 2.0 * k3.dv + k4.dv);
    af += (h / 6.0) * (k1.daf + 2.0 * k2.daf + 2.0 * k3.daf + k4.daf);
    ac += (h / 6.0) * (k1.dac + 2.0 * k2.dac + 2.0 * k3.dac + k4.dac);

    if (!x.allFinite() || !v.allFinite() || !std::isfinite(af) || !std::isfinite(ac))
      throw NonFiniteState(tr.times[i + 1]);

    tr.x.push_back(x);
    tr.v.push_back(v);
    tr.action_free.push_back(af);
    tr.action_control.push_back(ac);
  }
  return tr;
}

inline double energy(const Potential& p, const ClassicalTrajectory& tr, std::size_t i) {
  return 0.5 * tr.v.at(i).squaredNorm() + p.value(tr.x.at(i));
}

inline void write_trajectory_csv(std::ostream& os, const ClassicalTrajectory& tr) {
  std::vector<std::string> names{"t"};
  for (int a = 0; a < tr.dim; ++a) names.push_back("x" + std::to_string(a));
  for (int a = 0; a < tr.dim; ++a) names.push_back("v" + std::to_string(a));
  names.push_back("action_free");
  names.push_back("action_control");
  write_csv_header(os, names);
  std::vector<double> row;
  for (std::size_t i = 0; i < tr.size(); ++i) {
    row.clear();
    row.push_back(tr.times[i]);
    for (int a = 0; a < tr.dim; ++a) row.push_back(tr.x[i](a));
    for (int a = 0; a < tr.dim; ++a) row.push_back(tr.v[i](a));
    row.push_back(tr.action_free[i]);
    row.push_back(tr.action_control[i]);
    write_csv_row(os, row);
  }
}

}  // namespace tcs
