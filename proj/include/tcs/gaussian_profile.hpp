#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include "tcs/errors.hpp"
#include "tcs/fft.hpp"
#include "tcs/grid.hpp"
#include "tcs/packet.hpp"

namespace tcs {

// Result of projecting a state onto the Gaussian-amplitude family
//   g_{q,alpha}(x) = sqrt(det q)/C_N exp(-|q(x-alpha)|^2/2),
// q symmetric with eigenvalues in [sqrt(b/2), sqrt(3b/2)].  The distance is
// taken between |psi| and g; aligning the free phase of the family element
// with the target pointwise makes this reduction exact.
struct ProfileFit {
  double delta0 = 0.0;         // refined distance
  double coarse_delta0 = 0.0;  // grid-scan distance; refinement never exceeds it
  Eigen::MatrixXd q;
  Eigen::VectorXd alpha;
};

inline Eigen::VectorXd sample_profile(const Grid& g, const Eigen::MatrixXd& q,
                                      const Eigen::VectorXd& alpha) {
  const int n = g.dim();
  if (q.rows() != n || q.cols() != n || alpha.size() != n)
    throw std::invalid_argument("profile parameter dimensions must match the grid");
  Eigen::VectorXd out(static_cast<Eigen::Index>(g.total_points()));
  const double pref = std::sqrt(q.determinant()) / gauss_norm_constant(n);
  for (std::size_t i = 0; i < g.total_points(); ++i) {
    const Eigen::VectorXd s = q * (g.point(i) - alpha);
    out(static_cast<Eigen::Index>(i)) = pref * std::exp(-0.5 * s.squaredNorm());
  }
  return out;
}

// Equal bumps of the b-matched packet width at +-4/sqrt(b), flat phase,
// renormalized on the grid.
inline ComplexField double_bump_target(const Grid& g, double b) {
  if (g.dim() != 1) throw std::invalid_argument("double bump target is one-dimensional");
  if (!(b > 0.0)) throw std::invalid_argument("b must be > 0");
  const double c = 4.0 / std::sqrt(b);
  ComplexField f;
  f.grid = g;
  f.values.resize(static_cast<Eigen::Index>(g.total_points()));
  for (std::size_t i = 0; i < g.total_points(); ++i) {
    const double x = g.point(i)(0);
    f.values(static_cast<Eigen::Index>(i)) =
        std::exp(-0.5 * b * (x - c) * (x - c)) + std::exp(-0.5 * b * (x + c) * (x + c));
  }
  f.values /= l2_norm(f);
  return f;
}

namespace detail {

// Downhill simplex with box clamping applied inside the objective; the
// returned point is the clamped best vertex.  Deterministic for fixed
// inputs.  Stops when the value spread falls under f_tol.
inline std::pair<Eigen::VectorXd, double> nelder_mead(
    const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& start,
    const Eigen::VectorXd& step, double f_tol, int max_iter) {
  const int n = static_cast<int>(start.size());
  std::vector<Eigen::VectorXd> xs;
  std::vector<double> fs;
  xs.push_back(start);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd x = start;
    x(i) += step(i);
    xs.push_back(x);
  }
  for (const auto& x : xs) fs.push_back(f(x));

  std::vector<int> ord(xs.size());
  for (int it = 0; it < max_iter; ++it) {
    for (std::size_t i = 0; i < ord.size(); ++i) ord[i] = static_cast<int>(i);
    std::sort(ord.begin(), ord.end(), [&](int a, int b) { return fs[a] < fs[b]; });
    const int best = ord.front(), worst = ord.back(), second = ord[ord.size() - 2];
    if (fs[worst] - fs[best] <= f_tol) break;

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (int i : ord)
      if (i != worst) centroid += xs[i];
    centroid /= static_cast<double>(n);

    const Eigen::VectorXd xr = centroid + (centroid - xs[worst]);
    const double fr = f(xr);
    if (fr < fs[best]) {
      const Eigen::VectorXd xe = centroid + 2.0 * (centroid - xs[worst]);
      const double fe = f(xe);
      if (fe < fr) {
        xs[worst] = xe;
        fs[worst] = fe;
      } else {
        xs[worst] = xr;
        fs[worst] = fr;
      }
    } else if (fr < fs[second]) {
      xs[worst] = xr;
      fs[worst] = fr;
    } else {
      const Eigen::VectorXd xc = centroid + 0.5 * (xs[worst] - centroid);
      const double fc = f(xc);
      if (fc < fs[worst]) {
        xs[worst] = xc;
        fs[worst] = fc;
      } else {
        for (std::size_t i = 0; i < xs.size(); ++i) {
          if (static_cast<int>(i) == best) continue;
          xs[i] = xs[best] + 0.5 * (xs[i] - xs[best]);
          fs[i] = f(xs[i]);
        }
      }
    }
  }
  std::size_t bi = 0;
  for (std::size_t i = 1; i < xs.size(); ++i)
    if (fs[i] < fs[bi]) bi = i;
  return {xs[bi], fs[bi]};
}

struct SupportBox {
  Eigen::VectorXd lo, hi;
};

// Smallest axis box holding every sample above a relative floor, padded by
// two widths of the widest band profile and clipped to the grid.
inline SupportBox support_box(const Grid& g, const Eigen::VectorXd& m, double b) {
  SupportBox box;
  const int n = g.dim();
  box.lo = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::infinity());
  box.hi = -box.lo;
  const double floor_val = 1e-6 * m.maxCoeff();
  for (std::size_t i = 0; i < g.total_points(); ++i) {
    if (m(static_cast<Eigen::Index>(i)) < floor_val) continue;
    const Eigen::VectorXd x = g.point(i);
    box.lo = box.lo.cwiseMin(x);
    box.hi = box.hi.cwiseMax(x);
  }
  const double pad = 2.0 / std::sqrt(0.5 * b);
  for (int a = 0; a < n; ++a) {
    box.lo(a) = std::max(box.lo(a) - pad, g.lo(a));
    box.hi(a) = std::min(box.hi(a) + pad, g.hi(a));
  }
  return box;
}

}  // namespace detail

// Distance from a unit-norm state to the band-limited Gaussian-amplitude
// family, by exhaustive coarse search plus simplex refinement.  Both stages
// are deterministic; the refined value never exceeds the coarse one.
inline ProfileFit gaussian_set_distance(const ComplexField& target, double b) {
  const Grid& g = target.grid;
  const int n = g.dim();
  if (!(b > 0.0)) throw std::invalid_argument("b must be > 0");
  const double nrm = l2_norm(target);
  if (std::abs(nrm - 1.0) > 1e-8)
    throw NotNormalized("target norm is " + std::to_string(nrm) + ", expected 1");

  const Eigen::VectorXd m = target.values.cwiseAbs();
  const double qlo = std::sqrt(0.5 * b), qhi = std::sqrt(1.5 * b);
  const detail::SupportBox box = detail::support_box(g, m, b);
  const double hvol = g.cell_volume();

  ProfileFit fit;
  Eigen::VectorXd best_params;

  if (n == 1) {
    // Parameters (q, alpha); the coarse stage is a plain 64 x 64 scan.
    auto dist = [&](double q, double a) {
      const double pref = std::sqrt(q) / gauss_norm_constant(1);
      double s = 0.0;
      for (std::size_t i = 0; i < g.total_points(); ++i) {
        const double d = g.point(i)(0) - a;
        const double diff = m(static_cast<Eigen::Index>(i)) - pref * std::exp(-0.5 * q * q * d * d);
        s += diff * diff;
      }
      return std::sqrt(s * hvol);
    };
    double best = std::numeric_limits<double>::infinity();
    double bq = qlo, ba = 0.5 * (box.lo(0) + box.hi(0));
    for (int iq = 0; iq < 64; ++iq) {
      const double q = qlo + (qhi - qlo) * iq / 63.0;
      for (int ia = 0; ia < 64; ++ia) {
        const double a = box.lo(0) + (box.hi(0) - box.lo(0)) * ia / 63.0;
        const double d = dist(q, a);
        if (d < best) {
          best = d;
          bq = q;
          ba = a;
        }
      }
    }
    fit.coarse_delta0 = best;

    auto clamp1 = [&](const Eigen::VectorXd& p) {
      Eigen::VectorXd c(2);
      c(0) = std::clamp(p(0), qlo, qhi);
      c(1) = std::clamp(p(1), box.lo(0), box.hi(0));
      return c;
    };
    Eigen::VectorXd start(2), step(2);
    start << bq, ba;
    step << (qhi - qlo) / 32.0, (box.hi(0) - box.lo(0)) / 32.0;
    auto [p, val] = detail::nelder_mead(
        [&](const Eigen::VectorXd& raw) {
          const Eigen::VectorXd c = clamp1(raw);
          return dist(c(0), c(1));
        },
        start, step, 1e-8, 400);
    best_params = clamp1(p);
    if (val > fit.coarse_delta0) {
      best_params << bq, ba;
      val = fit.coarse_delta0;
    }
    fit.delta0 = val;
    fit.q = Eigen::MatrixXd::Constant(1, 1, best_params(0));
    fit.alpha = best_params.tail(1);
    return fit;
  }

  // Two dimensions: parameters (e1, e2, theta, a0, a1) with
  // q = R(theta) diag(e1, e2) R(theta)^T.  The coarse stage scans widths and
  // angle and handles the center search in one pass per combination via FFT
  // cross-correlation over all whole-cell shifts.
  auto make_q = [](double e1, double e2, double th) {
    Eigen::Matrix2d r;
    r << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
    Eigen::Matrix2d d = Eigen::Vector2d(e1, e2).asDiagonal();
    return Eigen::MatrixXd(r * d * r.transpose());
  };
  auto dist2d = [&](const Eigen::MatrixXd& q, const Eigen::VectorXd& a) {
    const Eigen::VectorXd prof = sample_profile(g, q, a);
    return std::sqrt((m - prof).squaredNorm() * hvol);
  };

  Fft fft(g);
  Eigen::VectorXcd mf = m.cast<std::complex<double>>();
  fft.forward(mf);
  const double m2 = m.squaredNorm() * hvol;

  double best = std::numeric_limits<double>::infinity();
  double be1 = qlo, be2 = qlo, bth = 0.0;
  Eigen::VectorXd ba = 0.5 * (box.lo + box.hi);
  const Eigen::VectorXd origin = g.lo;
  for (int i1 = 0; i1 < 16; ++i1) {
    const double e1 = qlo + (qhi - qlo) * i1 / 15.0;
    for (int i2 = 0; i2 < 16; ++i2) {
      const double e2 = qlo + (qhi - qlo) * i2 / 15.0;
      for (int it = 0; it < 8; ++it) {
        const double th = M_PI / 2.0 * it / 8.0;
        const Eigen::MatrixXd q = make_q(e1, e2, th);
        // Profile anchored at the grid origin with nearest-image displacement,
        // so a circular shift by j cells reproduces a profile centered at
        // origin + j*h.  The remaining periodization error is below the tail
        // mass for any in-band width.
        Eigen::VectorXd prof(static_cast<Eigen::Index>(g.total_points()));
        const double pref = std::sqrt(q.determinant()) / gauss_norm_constant(2);
        for (std::size_t j = 0; j < g.total_points(); ++j) {
          Eigen::VectorXd d = g.point(j) - origin;
          for (int ax = 0; ax < 2; ++ax) {
            const double L = g.hi(ax) - g.lo(ax);
            d(ax) -= L * std::round(d(ax) / L);
          }
          const Eigen::VectorXd sdev = q * d;
          prof(static_cast<Eigen::Index>(j)) = pref * std::exp(-0.5 * sdev.squaredNorm());
        }
        const double p2 = prof.squaredNorm() * hvol;
        Eigen::VectorXcd pf = prof.cast<std::complex<double>>();
        fft.forward(pf);
        Eigen::VectorXcd corr = mf.cwiseProduct(pf.conjugate());
        fft.inverse(corr);
        for (std::size_t j = 0; j < g.total_points(); ++j) {
          const Eigen::VectorXd a = g.point(j);
          if ((a - box.lo).minCoeff() < 0.0 || (box.hi - a).minCoeff() < 0.0) continue;
          const double ip = corr(static_cast<Eigen::Index>(j)).real() * hvol;
          const double d2 = std::max(m2 + p2 - 2.0 * ip, 0.0);
          if (d2 < best * best) {
            best = std::sqrt(d2);
            be1 = e1;
            be2 = e2;
            bth = th;
            ba = a;
          }
        }
      }
    }
  }
  fit.coarse_delta0 = best;

  auto clamp2 = [&](const Eigen::VectorXd& p) {
    Eigen::VectorXd c(5);
    c(0) = std::clamp(p(0), qlo, qhi);
    c(1) = std::clamp(p(1), qlo, qhi);
    c(2) = p(2);  // the angle is periodic, no clamp needed
    c(3) = std::clamp(p(3), box.lo(0), box.hi(0));
    c(4) = std::clamp(p(4), box.lo(1), box.hi(1));
    return c;
  };
  Eigen::VectorXd start(5), step(5);
  start << be1, be2, bth, ba(0), ba(1);
  step << (qhi - qlo) / 16.0, (qhi - qlo) / 16.0, M_PI / 32.0, 2.0 * g.spacing(0),
      2.0 * g.spacing(1);
  auto [p, val] = detail::nelder_mead(
      [&](const Eigen::VectorXd& raw) {
        const Eigen::VectorXd c = clamp2(raw);
        return dist2d(make_q(c(0), c(1), c(2)), c.tail(2));
      },
      start, step, 1e-8, 1000);
  best_params = clamp2(p);
  if (val > fit.coarse_delta0) {
    best_params << be1, be2, bth, ba(0), ba(1);
    val = fit.coarse_delta0;
  }
  fit.delta0 = val;
  fit.q = make_q(best_params(0), best_params(1), best_params(2));
  fit.alpha = best_params.tail(2);
  return fit;
}

}  // namespace tcs
