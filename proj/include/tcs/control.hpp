#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace tcs {

// One piece of a piecewise control, continuous on its closed interval.
// Sinusoids use absolute time so phase stays continuous across pieces;
// linear ramps are relative to the piece start.
struct ConstantPiece {
  Eigen::VectorXd value;
};
struct SinusoidPiece {
  Eigen::VectorXd amplitude;
  double angular_freq = 0.0;
  double phase = 0.0;
};
struct LinearPiece {
  Eigen::VectorXd value0;
  Eigen::VectorXd slope;
};

struct ControlPiece {
  double t_start = 0.0;
  double t_end = 0.0;
  std::variant<ConstantPiece, SinusoidPiece, LinearPiece> form;

  Eigen::VectorXd eval(double t) const {
    if (const auto* c = std::get_if<ConstantPiece>(&form)) return c->value;
    if (const auto* s = std::get_if<SinusoidPiece>(&form))
      return std::sin(s->angular_freq * t + s->phase) * s->amplitude;
    const auto& l = std::get<LinearPiece>(form);
    return l.value0 + (t - t_start) * l.slope;
  }

  int dim() const {
    if (const auto* c = std::get_if<ConstantPiece>(&form)) return static_cast<int>(c->value.size());
    if (const auto* s = std::get_if<SinusoidPiece>(&form))
      return static_cast<int>(s->amplitude.size());
    return static_cast<int>(std::get<LinearPiece>(form).value0.size());
  }

  // max_t |e(t)|_2 on the piece; the sinusoid bound |amplitude| is used as is.
  double sup_norm() const {
    if (const auto* c = std::get_if<ConstantPiece>(&form)) return c->value.norm();
    if (const auto* s = std::get_if<SinusoidPiece>(&form)) return s->amplitude.norm();
    const auto& l = std::get<LinearPiece>(form);
    return std::max(l.value0.norm(), (l.value0 + (t_end - t_start) * l.slope).norm());
  }
};

// Piecewise control on [0, horizon].  Pieces must abut; boundaries are
// snapped exactly so downstream step sequences contain them verbatim.
class ControlSignal {
 public:
  explicit ControlSignal(std::vector<ControlPiece> pieces) : pieces_(std::move(pieces)) {
    if (pieces_.empty()) throw std::invalid_argument("control needs at least one piece");
    dim_ = pieces_.front().dim();
    const double scale = std::max(1.0, std::abs(pieces_.back().t_end));
    if (std::abs(pieces_.front().t_start) > 1e-15 * scale)
      throw std::invalid_argument("control must start at t = 0");
    pieces_.front().t_start = 0.0;
    for (std::size_t i = 0; i < pieces_.size(); ++i) {
      if (pieces_[i].dim() != dim_) throw std::invalid_argument("piece dimension mismatch");
      if (!(pieces_[i].t_end > pieces_[i].t_start))
        throw std::invalid_argument("piece must have positive length");
      if (i + 1 < pieces_.size()) {
        if (std::abs(pieces_[i + 1].t_start - pieces_[i].t_end) > 1e-15 * scale)
          throw std::invalid_argument("pieces must abut");
        pieces_[i + 1].t_start = pieces_[i].t_end;
      }
    }
  }

  static ControlSignal zero(int dim, double horizon) {
    return constant(Eigen::VectorXd::Zero(dim), horizon);
  }

  static ControlSignal constant(Eigen::VectorXd value, double horizon) {
    return ControlSignal({ControlPiece{0.0, horizon, ConstantPiece{std::move(value)}}});
  }

  static ControlSignal sinusoid(Eigen::VectorXd amplitude, double angular_freq, double phase,
                                double horizon) {
    return ControlSignal(
        {ControlPiece{0.0, horizon, SinusoidPiece{std::move(amplitude), angular_freq, phase}}});
  }

  static ControlSignal linear(Eigen::VectorXd value0, Eigen::VectorXd slope, double horizon) {
    return ControlSignal({ControlPiece{0.0, horizon, LinearPiece{std::move(value0), std::move(slope)}}});
  }

  // switchings sign flips -> switchings + 1 equal pieces alternating +-value.
  static ControlSignal bang_bang(const Eigen::VectorXd& value, int switchings, double horizon) {
    if (switchings < 0) throw std::invalid_argument("switchings must be >= 0");
    const int n = switchings + 1;
    std::vector<ControlPiece> ps;
    ps.reserve(n);
    for (int i = 0; i < n; ++i) {
      const double a = horizon * i / n;
      const double b = (i + 1 == n) ? horizon : horizon * (i + 1) / n;
      ps.push_back(ControlPiece{a, b, ConstantPiece{(i % 2 == 0 ? 1.0 : -1.0) * value}});
    }
    return ControlSignal(std::move(ps));
  }

  static ControlSignal piecewise_constant(const std::vector<Eigen::VectorXd>& values,
                                          double horizon) {
    if (values.empty()) throw std::invalid_argument("need at least one value");
    std::vector<ControlPiece> ps;
    const int n = static_cast<int>(values.size());
    for (int i = 0; i < n; ++i) {
      const double a = horizon * i / n;
      const double b = (i + 1 == n) ? horizon : horizon * (i + 1) / n;
      ps.push_back(ControlPiece{a, b, ConstantPiece{values[i]}});
    }
    return ControlSignal(std::move(ps));
  }

  int dim() const { return dim_; }
  double horizon() const { return pieces_.back().t_end; }
  const std::vector<ControlPiece>& pieces() const { return pieces_; }

  // Interior piece boundaries; integrators must not step across them.
  std::vector<double> breakpoints() const {
    std::vector<double> b;
    for (std::size_t i = 0; i + 1 < pieces_.size(); ++i) b.push_back(pieces_[i].t_end);
    return b;
  }

  // Value at t; at an interior boundary the right piece wins.  Integrators
  // that need a one-sided limit evaluate the piece directly.
  Eigen::VectorXd eval(double t) const { return pieces_[piece_index(t)].eval(t); }

  std::size_t piece_index(double t) const {
    if (t <= 0.0) return 0;
    if (t >= horizon()) return pieces_.size() - 1;
    std::size_t lo = 0, hi = pieces_.size() - 1;
    while (lo < hi) {
      const std::size_t mid = (lo + hi) / 2;
      if (t < pieces_[mid].t_end)
        hi = mid;
      else
        lo = mid + 1;
    }
    return lo;
  }

  double sup_norm() const {
    double m = 0.0;
    for (const auto& p : pieces_) m = std::max(m, p.sup_norm());
    return m;
  }

  // Restriction to [0, t_end]; a straddling piece is clipped in place.
  ControlSignal truncated(double t_end) const {
    if (!(t_end > 0.0) || t_end > horizon() * (1.0 + 1e-12))
      throw std::invalid_argument("truncation must land inside the horizon");
    std::vector<ControlPiece> ps;
    for (const auto& p : pieces_) {
      if (p.t_start >= t_end) break;
      ControlPiece q = p;
      if (q.t_end > t_end) q.t_end = t_end;
      ps.push_back(std::move(q));
      if (ps.back().t_end >= t_end) break;
    }
    return ControlSignal(std::move(ps));
  }

 private:
  std::vector<ControlPiece> pieces_;
  int dim_ = 0;
};

// Sorted union of a uniform grid on [t0, t1] and the given marks.  Marks win
// when a uniform point rounds onto them, so piece boundaries appear exactly.
inline std::vector<double> step_sequence(double t0, double t1, double dt,
                                         const std::vector<double>& marks = {}) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be > 0");
  if (!(t1 > t0)) throw std::invalid_argument("empty time interval");
  const double tol = 1e-12 * std::max({1.0, std::abs(t0), std::abs(t1)});
  std::vector<double> ts;
  const auto n = static_cast<long long>(std::ceil((t1 - t0) / dt - 1e-9));
  ts.reserve(static_cast<std::size_t>(n) + marks.size() + 1);
  for (long long k = 0; k < n; ++k) ts.push_back(t0 + static_cast<double>(k) * dt);
  ts.push_back(t1);
  for (double m : marks) {
    if (m <= t0 + tol || m >= t1 - tol) continue;
    auto it = std::lower_bound(ts.begin(), ts.end(), m);
    if (it != ts.end() && std::abs(*it - m) <= tol)
      *it = m;
    else if (it != ts.begin() && std::abs(*(it - 1) - m) <= tol)
      *(it - 1) = m;
    else
      ts.insert(it, m);
  }
  return ts;
}

}  // namespace tcs
