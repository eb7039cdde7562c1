#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace tcs::detail {
inline std::string short_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}
}  // namespace tcs::detail

namespace tcs {

// Errors the CLI maps to exit code 4 (a numerical guard tripped).
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// State became NaN/Inf during ODE integration.
struct NonFiniteState : NumericalError {
  explicit NonFiniteState(double t)
      : NumericalError("non-finite state at t = " + detail::short_number(t)), time(t) {}
  double time;
};

// Riccati solution exceeded the blow-up guard before the requested time.
struct BlownUp : NumericalError {
  explicit BlownUp(double t)
      : NumericalError("Riccati solution blew up at t = " + detail::short_number(t)), time(t) {}
  double time;
};

// Stored samples do not cover the requested horizon.
struct HorizonNotCovered : NumericalError {
  using NumericalError::NumericalError;
};

// Probability mass reached the box boundary; the periodic solution is no
// longer a faithful whole-space one.
struct TailMassExceeded : NumericalError {
  TailMassExceeded(double t, double mass)
      : NumericalError("boundary tail mass " + detail::short_number(mass) + " at t = " + detail::short_number(t)),
        time(t), mass(mass) {}
  double time;
  double mass;
};

// Errors the CLI maps to exit code 3 (bad inputs).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Two fields/trajectories that must share a grid do not.
struct GridMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Target state must be unit norm.
struct NotNormalized : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Target is (numerically) inside the Gaussian profile set, so no obstruction
// horizon can be certified.
struct DegenerateTarget : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// The obstruction experiment needs at least one control.
struct EmptyControlSet : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace tcs
