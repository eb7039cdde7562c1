#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>

#include "tcs/control.hpp"

using tcs::ControlPiece;
using tcs::ControlSignal;
using tcs::step_sequence;

namespace {
Eigen::VectorXd vec1(double v) {
  Eigen::VectorXd x(1);
  x << v;
  return x;
}
}  // namespace

TEST_CASE("piece evaluation closed forms", "[control]") {
  auto c = ControlSignal::constant(vec1(3.0), 1.0);
  CHECK(c.eval(0.25)(0) == 3.0);

  auto s = ControlSignal::sinusoid(vec1(2.0), 5.0, 0.3, 1.0);
  CHECK(s.eval(0.4)(0) == Catch::Approx(2.0 * std::sin(5.0 * 0.4 + 0.3)).epsilon(1e-15));

  auto l = ControlSignal::linear(vec1(1.0), vec1(-2.0), 1.0);
  CHECK(l.eval(0.5)(0) == Catch::Approx(1.0 - 2.0 * 0.5).epsilon(1e-15));
}

TEST_CASE("sinusoid uses absolute time across pieces", "[control]") {
  // the same sinusoid split at an interior point must stay continuous
  tcs::SinusoidPiece s{vec1(1.0), 3.0, 0.2};
  ControlSignal split({ControlPiece{0.0, 0.4, s}, ControlPiece{0.4, 1.0, s}});
  ControlSignal whole({ControlPiece{0.0, 1.0, s}});
  for (double t : {0.1, 0.39999, 0.4, 0.7}) CHECK(split.eval(t)(0) == whole.eval(t)(0));
}

TEST_CASE("partition validation", "[control]") {
  tcs::ConstantPiece one{vec1(1.0)};
  CHECK_THROWS_AS(ControlSignal({ControlPiece{0.1, 1.0, one}}), std::invalid_argument);
  CHECK_THROWS_AS(
      ControlSignal({ControlPiece{0.0, 0.5, one}, ControlPiece{0.6, 1.0, one}}),
      std::invalid_argument);
  CHECK_THROWS_AS(
      ControlSignal({ControlPiece{0.0, 0.5, one}, ControlPiece{0.4, 1.0, one}}),
      std::invalid_argument);
  CHECK_THROWS_AS(ControlSignal({ControlPiece{0.0, 0.0, one}}), std::invalid_argument);
  // an abutting mismatch below 1e-15 relative is snapped, not rejected
  ControlSignal ok({ControlPiece{0.0, 0.5, one}, ControlPiece{0.5 + 2e-16, 1.0, one}});
  CHECK(ok.pieces()[1].t_start == 0.5);
}

TEST_CASE("bang-bang builder", "[control]") {
  auto c = ControlSignal::bang_bang(vec1(100.0), 3, 1.0);
  REQUIRE(c.pieces().size() == 4);
  CHECK(c.eval(0.1)(0) == 100.0);
  CHECK(c.eval(0.3)(0) == -100.0);
  CHECK(c.eval(0.6)(0) == 100.0);
  CHECK(c.eval(0.9)(0) == -100.0);
  CHECK(c.horizon() == 1.0);
  CHECK(c.breakpoints().size() == 3);
  CHECK(c.sup_norm() == 100.0);
}

TEST_CASE("linear sup norm is attained at an endpoint", "[control]") {
  auto l = ControlSignal::linear(vec1(1.0), vec1(-3.0), 1.0);
  CHECK(l.sup_norm() == Catch::Approx(2.0).epsilon(1e-15));  // |1 - 3*1| = 2
}

TEST_CASE("truncation clips the straddling piece", "[control]") {
  auto c = ControlSignal::bang_bang(vec1(1.0), 3, 1.0);
  auto t = c.truncated(0.6);
  CHECK(t.horizon() == 0.6);
  REQUIRE(t.pieces().size() == 3);
  CHECK(t.pieces().back().t_end == 0.6);
  CHECK(t.eval(0.55)(0) == 1.0);
  CHECK_THROWS_AS(c.truncated(2.0), std::invalid_argument);
}

TEST_CASE("step sequence covers the interval and keeps marks exact", "[control]") {
  const double mark = 0.0503;
  auto ts = step_sequence(0.0, 0.1, 1e-3, {mark});
  CHECK(ts.front() == 0.0);
  CHECK(ts.back() == 0.1);
  for (std::size_t i = 0; i + 1 < ts.size(); ++i) CHECK(ts[i] < ts[i + 1]);
  CHECK(std::find(ts.begin(), ts.end(), mark) != ts.end());
}

TEST_CASE("step sequence merges marks that collide with uniform points", "[control]") {
  auto ts = step_sequence(0.0, 1.0, 0.25, {0.5, 0.5});
  CHECK(ts == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
}

TEST_CASE("dt larger than a piece still lands on its boundaries", "[control]") {
  auto c = ControlSignal::bang_bang(vec1(1.0), 7, 0.08);  // pieces of length 0.01
  auto ts = step_sequence(0.0, c.horizon(), 0.05, c.breakpoints());
  for (double b : c.breakpoints()) CHECK(std::find(ts.begin(), ts.end(), b) != ts.end());
}
