#pragma once

#include <fftw3.h>

#include <Eigen/Dense>
#include <complex>
#include <mutex>
#include <stdexcept>
#include <vector>

#include "tcs/grid.hpp"

namespace tcs {

// FFTW planning is not thread safe; every plan create/destroy goes through
// this lock.  Execution on distinct plans is safe concurrently.
inline std::mutex& fftw_plan_mutex() {
  static std::mutex m;
  return m;
}

// In-place complex transforms on a grid-shaped buffer.  Forward uses the
// e^{-ikx} convention (FFTW_FORWARD); inverse is normalized by 1/M.
class Fft {
 public:
  explicit Fft(const Grid& g) : n_(g.total_points()) {
    buf_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n_));
    if (!buf_) throw std::bad_alloc();
    std::lock_guard<std::mutex> lock(fftw_plan_mutex());
    if (g.dim() == 1) {
      fwd_ = fftw_plan_dft_1d(g.points[0], buf_, buf_, FFTW_FORWARD, FFTW_ESTIMATE);
      bwd_ = fftw_plan_dft_1d(g.points[0], buf_, buf_, FFTW_BACKWARD, FFTW_ESTIMATE);
    } else {
      fwd_ = fftw_plan_dft_2d(g.points[0], g.points[1], buf_, buf_, FFTW_FORWARD, FFTW_ESTIMATE);
      bwd_ = fftw_plan_dft_2d(g.points[0], g.points[1], buf_, buf_, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    if (!fwd_ || !bwd_) throw std::runtime_error("fftw plan creation failed");
  }

  Fft(const Fft&) = delete;
  Fft& operator=(const Fft&) = delete;

  ~Fft() {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex());
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
    fftw_free(buf_);
  }

  void forward(Eigen::VectorXcd& v) const { run(fwd_, v, 1.0); }
  void inverse(Eigen::VectorXcd& v) const { run(bwd_, v, 1.0 / static_cast<double>(n_)); }

 private:
  void run(fftw_plan plan, Eigen::VectorXcd& v, double scale) const {
    if (static_cast<std::size_t>(v.size()) != n_) throw std::invalid_argument("buffer size mismatch");
    auto* b = reinterpret_cast<std::complex<double>*>(buf_);
    std::copy(v.data(), v.data() + n_, b);
    fftw_execute(plan);
    if (scale == 1.0)
      std::copy(b, b + n_, v.data());
    else
      for (std::size_t i = 0; i < n_; ++i) v(static_cast<Eigen::Index>(i)) = scale * b[i];
  }

  std::size_t n_;
  fftw_complex* buf_ = nullptr;
  fftw_plan fwd_ = nullptr;
  fftw_plan bwd_ = nullptr;
};

// Angular wavenumbers in FFTW output order: 2*pi*j/L for j = 0..n/2-1 then
// j - n for the upper half.
inline std::vector<double> wavenumbers(const Grid& g, int axis) {
  const int n = g.points[axis];
  const double l = g.hi(axis) - g.lo(axis);
  std::vector<double> k(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    const int f = (j < n / 2) ? j : j - n;
    k[static_cast<std::size_t>(j)] = 2.0 * M_PI * f / l;
  }
  return k;
}

// |k|^2 per flattened grid index.
inline Eigen::VectorXd ksq_table(const Grid& g) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(g.total_points()));
  const auto k0 = wavenumbers(g, 0);
  if (g.dim() == 1) {
    for (std::size_t i = 0; i < k0.size(); ++i)
      out(static_cast<Eigen::Index>(i)) = k0[i] * k0[i];
  } else {
    const auto k1 = wavenumbers(g, 1);
    Eigen::Index idx = 0;
    for (double a : k0)
      for (double b : k1) out(idx++) = a * a + b * b;
  }
  return out;
}

inline ComplexField spectral_laplacian(const ComplexField& f) {
  ComplexField out = f;
  Fft fft(f.grid);
  fft.forward(out.values);
  const Eigen::VectorXd k2 = ksq_table(f.grid);
  for (Eigen::Index i = 0; i < out.values.size(); ++i) out.values(i) *= -k2(i);
  fft.inverse(out.values);
  return out;
}

}  // namespace tcs
