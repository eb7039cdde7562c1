#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <functional>

#include "tcs/classical.hpp"
#include "tcs/potential.hpp"
#include "tcs/riccati.hpp"

using namespace tcs;

namespace {

Eigen::VectorXd vec1(double a) {
  Eigen::VectorXd v(1);
  v << a;
  return v;
}

// Root of a strictly increasing scalar function by plain bisection.  Used to
// solve each horizon inequality separately, independent of the library's
// joint feasibility search.
double bisect_root(const std::function<double(double)>& f, double lo, double hi) {
  REQUIRE(f(lo) < 0.0);
  REQUIRE(f(hi) > 0.0);
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double horizon_oracle(double b, double hess_sup) {
  const double bb = std::max(b, b * b);
  const double r1 = bisect_root(
      [&](double t) { return t * (1.0 + bb * std::exp(4.0 * t) + hess_sup) - 1.0; }, 0.0, 1.0);
  const double r2 =
      bisect_root([&](double t) { return 2.0 * t * std::exp(2.0 * t) - 0.5; }, 0.0, 1.0);
  return std::min(r1, r2);
}

ClassicalTrajectory rest_trajectory(const Potential& p, double horizon, double dt) {
  const int n = p.dim();
  return integrate_newton(p, ControlSignal::zero(n, horizon), Eigen::VectorXd::Zero(n),
                          Eigen::VectorXd::Zero(n), dt);
}

}  // namespace

TEST_CASE("guaranteed horizon matches per-constraint bisection") {
  // Frozen values of the two scalar roots; the smaller one is the horizon.
  //   b=1, hess=1:  trace root 0.2244883402575280, growth root 0.1758668556245979
  //   b=2, hess=1:  trace root 0.1186362084363495 (now binding)
  CHECK(guaranteed_horizon(1.0, 1.0) == Catch::Approx(0.175866855624598).epsilon(1e-9));
  CHECK(guaranteed_horizon(2.0, 1.0) == Catch::Approx(0.118636208436349).epsilon(1e-9));
  CHECK(guaranteed_horizon(1.0, 1.4) == Catch::Approx(0.175866855624598).epsilon(1e-9));
  CHECK(guaranteed_horizon(0.5, 0.0) == Catch::Approx(horizon_oracle(0.5, 0.0)).epsilon(1e-9));

  for (double b : {0.25, 0.5, 1.0, 1.7, 2.0, 3.0}) {
    for (double hs : {0.0, 0.3, 1.0, 2.5, 10.0}) {
      const double t = guaranteed_horizon(b, hs);
      CHECK(t == Catch::Approx(horizon_oracle(b, hs)).epsilon(1e-8));
      // The binding inequality is tight at the returned time.
      const double bb = std::max(b, b * b);
      const double g1 = t * (1.0 + bb * std::exp(4.0 * t) + hs) - 1.0;
      const double g2 = 2.0 * t * std::exp(2.0 * t) - 0.5;
      CHECK(g1 <= 1e-10);
      CHECK(g2 <= 1e-10);
      CHECK(std::max(g1, g2) > -1e-8);
    }
  }
}

TEST_CASE("guaranteed horizon is monotone and guards its arguments") {
  CHECK(guaranteed_horizon(1.0, 1.0) >= guaranteed_horizon(1.0, 2.0));
  CHECK(guaranteed_horizon(1.0, 1.0) >= guaranteed_horizon(2.0, 1.0));
  CHECK(guaranteed_horizon(0.5, 0.0) >= guaranteed_horizon(0.5, 5.0));
  // A tiny cap is feasible outright and is returned as is.
  CHECK(guaranteed_horizon(1.0, 1.0, 0.01) == 0.01);
  CHECK_THROWS_AS(guaranteed_horizon(0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(guaranteed_horizon(1.0, -0.5), std::invalid_argument);
}

TEST_CASE("free Riccati flow matches the rational closed form") {
  // V = 0: Q(t) = ib/(1+ibt), so Q1 = b^2 t/(1+b^2 t^2), Q2 = b/(1+b^2 t^2),
  // int tr Q1 = log(1+b^2 t^2)/2, int tr Q2 = atan(bt).
  for (double b : {0.5, 1.0, 2.0}) {
    const Potential p = Potential::zero(1);
    const auto tr = rest_trajectory(p, 0.15, 1e-3);
    const auto rc = integrate_riccati(p, tr, b);
    REQUIRE(!rc.blow_up_at);
    REQUIRE(rc.size() == tr.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < rc.size(); ++i) {
      const double t = rc.times[i];
      const double den = 1.0 + b * b * t * t;
      worst = std::max(worst, std::abs(rc.q1[i](0, 0) - b * b * t / den));
      worst = std::max(worst, std::abs(rc.q2[i](0, 0) - b / den));
      worst = std::max(worst, std::abs(rc.int_tr_q1[i] - 0.5 * std::log(den)));
      worst = std::max(worst, std::abs(rc.int_tr_q2[i] - std::atan(b * t)));
    }
    CHECK(worst <= 1e-9);
  }
}

TEST_CASE("accumulated bound integrand matches the free closed form") {
  // b=1, V=0: lambda_min(Q2)^{-3/2} = (1+t^2)^{3/2}, whose integral at
  // t = 0.15 is 0.151693180156400189.
  const Potential p = Potential::zero(1);
  const auto tr = rest_trajectory(p, 0.15, 1e-3);
  const auto rc = integrate_riccati(p, tr, 1.0);
  CHECK(rc.int_inv_q2_32.back() == Catch::Approx(0.151693180156400189).epsilon(1e-10));
}

TEST_CASE("matched harmonic width is a fixed point of the flow") {
  // Omega = I and b = 1 start the flow at the stationary point Q = iI; every
  // RK4 stage derivative vanishes identically, so the samples never move.
  const int n = 2;
  const Potential p = Potential::harmonic(Eigen::MatrixXd::Identity(n, n));
  const auto u = ControlSignal::sinusoid(Eigen::Vector2d(3.0, -1.0), 2.0, 0.4, 1.0);
  const auto tr = integrate_newton(p, u, Eigen::Vector2d(0.3, -0.2), Eigen::Vector2d(1.0, 0.5), 1e-3);
  const auto rc = integrate_riccati(p, tr, 1.0);
  REQUIRE(!rc.blow_up_at);
  double drift = 0.0;
  for (std::size_t i = 0; i < rc.size(); ++i) {
    drift = std::max(drift, rc.q1[i].cwiseAbs().maxCoeff());
    drift = std::max(drift, (rc.q2[i] - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff());
  }
  CHECK(drift <= 1e-10);
  CHECK(rc.int_tr_q1.back() == 0.0);
  CHECK(rc.int_tr_q2.back() == Catch::Approx(n * 1.0).epsilon(1e-12));
  CHECK(rc.int_inv_q2_32.back() == Catch::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("determinant identity holds along driven anharmonic flows") {
  // det Q2 = b^N exp(-2 int tr Q1) is conserved exactly by the flow; the
  // integrator should keep the defect at discretization level.
  SECTION("one dimension") {
    const Potential p = Potential::cosine_harmonic(Eigen::MatrixXd::Identity(1, 1), 0.3, vec1(1.3));
    const double ts = guaranteed_horizon(1.0, p.hess_sup());
    const auto u = ControlSignal::bang_bang(vec1(5.0), 3, ts);
    const auto tr = integrate_newton(p, u, vec1(0.2), vec1(-0.4), 5e-4);
    const auto rc = integrate_riccati(p, tr, 1.0);
    REQUIRE(!rc.blow_up_at);
    CHECK(det_identity_residual(rc) <= 1e-8);
  }
  SECTION("two dimensions") {
    Eigen::MatrixXd omega(2, 2);
    omega << 1.0, 0.2, 0.2, 0.8;
    const Potential p = Potential::cosine_harmonic(omega, 0.4, Eigen::Vector2d(1.0, -0.7));
    const double ts = guaranteed_horizon(2.0, p.hess_sup());
    const auto u = ControlSignal::bang_bang(Eigen::Vector2d(4.0, -3.0), 2, ts);
    const auto tr = integrate_newton(p, u, Eigen::Vector2d(0.1, 0.3), Eigen::Vector2d(0.5, -0.2), 5e-4);
    const auto rc = integrate_riccati(p, tr, 2.0);
    REQUIRE(!rc.blow_up_at);
    CHECK(det_identity_residual(rc) <= 1e-8);
  }
}

TEST_CASE("imaginary part stays inside the width band up to the horizon") {
  Eigen::MatrixXd omega(2, 2);
  omega << 1.0, 0.2, 0.2, 0.8;
  const Potential p = Potential::cosine_harmonic(omega, 0.4, Eigen::Vector2d(1.0, -0.7));
  for (double b : {0.5, 1.0, 2.0}) {
    const double ts = guaranteed_horizon(b, p.hess_sup());
    const auto u = ControlSignal::bang_bang(Eigen::Vector2d(40.0, -25.0), 4, ts);
    const auto tr = integrate_newton(p, u, Eigen::Vector2d::Zero(), Eigen::Vector2d::Zero(), 2e-4);
    const auto rc = integrate_riccati(p, tr, b);
    REQUIRE(!rc.blow_up_at);
    const BandReport rep = check_q2_band(rc, ts);
    CHECK(rep.holds);
    CHECK(rep.min_eig >= 0.5 * b - 1e-9);
    CHECK(rep.max_eig <= 1.5 * b + 1e-9);
  }
}

TEST_CASE("band check demands coverage of the requested horizon") {
  const Potential p = Potential::zero(1);
  const auto tr = rest_trajectory(p, 0.1, 1e-3);
  const auto rc = integrate_riccati(p, tr, 1.0);
  CHECK_NOTHROW(check_q2_band(rc, 0.1));
  CHECK_THROWS_AS(check_q2_band(rc, 0.2), HorizonNotCovered);
}

TEST_CASE("width data depends on the control only through the path") {
  // A harmonic Hessian is position independent, so two controls with the
  // same step grid must produce bit-identical width samples even though the
  // classical paths differ.
  const Potential p = Potential::harmonic(2.0 * Eigen::MatrixXd::Identity(1, 1));
  const auto ua = ControlSignal::constant(vec1(50.0), 0.3);
  const auto ub = ControlSignal::constant(vec1(-50.0), 0.3);
  const auto tra = integrate_newton(p, ua, vec1(0.0), vec1(0.0), 1e-3);
  const auto trb = integrate_newton(p, ub, vec1(1.0), vec1(-2.0), 1e-3);
  const auto rca = integrate_riccati(p, tra, 1.0);
  const auto rcb = integrate_riccati(p, trb, 1.0);
  REQUIRE(rca.size() == rcb.size());
  CHECK((tra.x.back() - trb.x.back()).norm() > 0.1);
  for (std::size_t i = 0; i < rca.size(); ++i) {
    CHECK((rca.q1[i] - rcb.q1[i]).cwiseAbs().maxCoeff() == 0.0);
    CHECK((rca.q2[i] - rcb.q2[i]).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("width integrator converges at fourth order") {
  // Position-dependent Hessian so the half-step interpolation enters; an
  // interpolant below O(h^3) in the stage positions would drop the observed
  // order and the error ratio under refinement would fall well below 16.
  const Potential p = Potential::cosine_harmonic(Eigen::MatrixXd::Identity(1, 1), 0.8, vec1(2.0));
  auto solve = [&](double dt) {
    const auto u = ControlSignal::zero(1, 0.2);
    const auto tr = integrate_newton(p, u, vec1(0.3), vec1(0.7), dt);
    return integrate_riccati(p, tr, 1.0);
  };
  const auto ref = solve(1e-5);
  auto err = [&](const RiccatiTrajectory& rc) {
    REQUIRE(rc.times.back() == Catch::Approx(0.2).margin(1e-14));
    return std::max((rc.q1.back() - ref.q1.back()).cwiseAbs().maxCoeff(),
                    (rc.q2.back() - ref.q2.back()).cwiseAbs().maxCoeff());
  };
  const double e1 = err(solve(4e-3));
  const double e2 = err(solve(2e-3));
  CHECK(e1 / e2 >= 12.0);
  CHECK(e1 / e2 <= 20.0);
}

TEST_CASE("guard truncates runaway width data instead of emitting garbage") {
  SECTION("norm guard") {
    const Potential p = Potential::zero(1);
    const auto tr = rest_trajectory(p, 0.15, 1e-3);
    const auto rc = integrate_riccati(p, tr, 1.0, /*guard=*/0.9);
    REQUIRE(rc.blow_up_at.has_value());
    CHECK(*rc.blow_up_at == tr.times[1]);
    CHECK(rc.size() == 1);
    CHECK_THROWS_AS(check_q2_band(rc, 0.15), HorizonNotCovered);
  }
  SECTION("loss of positivity under a too-coarse step") {
    // Strong concave bump and a step far outside the stability region of the
    // width relaxation rate; the samples must stop at the first bad step.
    const Potential p = Potential::cosine_harmonic(Eigen::MatrixXd::Zero(1, 1), 1e4, vec1(1.0));
    const auto tr = rest_trajectory(p, 1.0, 0.05);
    const auto rc = integrate_riccati(p, tr, 1.0);
    REQUIRE(rc.blow_up_at.has_value());
    CHECK(rc.times.back() < 1.0);
    for (const auto& q2 : rc.q2) CHECK(lambda_min_sym(q2) > 0.0);
  }
}

TEST_CASE("width samples reject invalid inputs") {
  const Potential p = Potential::zero(1);
  const auto tr = rest_trajectory(p, 0.1, 1e-3);
  CHECK_THROWS_AS(integrate_riccati(p, tr, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(integrate_riccati(p, tr, -1.0), std::invalid_argument);
  const Potential p2 = Potential::zero(2);
  CHECK_THROWS_AS(integrate_riccati(p2, tr, 1.0), std::invalid_argument);
}
