#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "tcs/linalg.hpp"

namespace tcs {

// Closed catalog of smooth external potentials with exact derivatives and
// precomputed sup norms of the Hessian and third derivative.
//
//   zero             V = 0
//   harmonic         V = 1/2 <Omega x, x>,  Omega symmetric PSD
//   cosine_harmonic  V = 1/2 <Omega x, x> + a cos(<k, x>)
//   tabulated        reserved, evaluators reject it
class Potential {
 public:
  enum class Kind { zero, harmonic, cosine_harmonic, tabulated };

  static Potential zero(int dim) {
    Potential p(Kind::zero, dim);
    p.omega_sq_ = Eigen::MatrixXd::Zero(dim, dim);
    return p;
  }

  static Potential harmonic(Eigen::MatrixXd omega_sq) {
    Potential p(Kind::harmonic, static_cast<int>(omega_sq.rows()));
    p.set_quadratic(std::move(omega_sq));
    p.hess_sup_ = lambda_max_sym(p.omega_sq_);
    return p;
  }

  static Potential cosine_harmonic(Eigen::MatrixXd omega_sq, double amplitude,
                                   Eigen::VectorXd wavevector) {
    Potential p(Kind::cosine_harmonic, static_cast<int>(omega_sq.rows()));
    p.set_quadratic(std::move(omega_sq));
    if (wavevector.size() != p.dim_)
      throw std::invalid_argument("wavevector dimension mismatch");
    if (!(amplitude >= 0)) throw std::invalid_argument("amplitude must be >= 0");
    p.amplitude_ = amplitude;
    p.wavevector_ = std::move(wavevector);
    const double k2 = p.wavevector_.squaredNorm();
    p.hess_sup_ = lambda_max_sym(p.omega_sq_) + amplitude * k2;
    p.third_sup_ = amplitude * k2 * std::sqrt(k2);
    return p;
  }

  static Potential tabulated(int dim) { return Potential(Kind::tabulated, dim); }

  int dim() const { return dim_; }
  Kind kind() const { return kind_; }
  double hess_sup() const { return hess_sup_; }
  double third_sup() const { return third_sup_; }
  const Eigen::MatrixXd& omega_sq() const { return omega_sq_; }
  double amplitude() const { return amplitude_; }
  const Eigen::VectorXd& wavevector() const { return wavevector_; }

  double value(const Eigen::VectorXd& x) const {
    check(x);
    switch (kind_) {
      case Kind::zero: return 0.0;
      case Kind::harmonic: return 0.5 * x.dot(omega_sq_ * x);
      case Kind::cosine_harmonic:
        return 0.5 * x.dot(omega_sq_ * x) + amplitude_ * std::cos(wavevector_.dot(x));
      default: throw std::runtime_error("tabulated potential is unsupported");
    }
  }

  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const {
    check(x);
    switch (kind_) {
      case Kind::zero: return Eigen::VectorXd::Zero(dim_);
      case Kind::harmonic: return omega_sq_ * x;
      case Kind::cosine_harmonic:
        return omega_sq_ * x - amplitude_ * std::sin(wavevector_.dot(x)) * wavevector_;
      default: throw std::runtime_error("tabulated potential is unsupported");
    }
  }

  Eigen::MatrixXd hessian(const Eigen::VectorXd& x) const {
    check(x);
    switch (kind_) {
      case Kind::zero: return Eigen::MatrixXd::Zero(dim_, dim_);
      case Kind::harmonic: return omega_sq_;
      case Kind::cosine_harmonic:
        return omega_sq_ - amplitude_ * std::cos(wavevector_.dot(x)) *
                               (wavevector_ * wavevector_.transpose());
      default: throw std::runtime_error("tabulated potential is unsupported");
    }
  }

  // V(x) minus its second-order Taylor polynomial at xc.  The quadratic part
  // cancels identically, so only the cosine term contributes; quadratic kinds
  // return exactly 0 rather than rounding noise.
  double taylor_remainder(const Eigen::VectorXd& xc, const Eigen::VectorXd& x) const {
    check(x);
    check(xc);
    if (kind_ == Kind::zero || kind_ == Kind::harmonic) return 0.0;
    if (kind_ != Kind::cosine_harmonic)
      throw std::runtime_error("tabulated potential is unsupported");
    const double tc = wavevector_.dot(xc);
    const double dk = wavevector_.dot(x - xc);
    return amplitude_ *
           (std::cos(tc + dk) - std::cos(tc) + std::sin(tc) * dk + 0.5 * std::cos(tc) * dk * dk);
  }

 private:
  Potential(Kind kind, int dim) : kind_(kind), dim_(dim) {
    if (dim < 1) throw std::invalid_argument("dim must be >= 1");
  }

  void set_quadratic(Eigen::MatrixXd omega_sq) {
    if (omega_sq.rows() != omega_sq.cols() || omega_sq.rows() != dim_)
      throw std::invalid_argument("omega_sq must be dim x dim");
    if ((omega_sq - omega_sq.transpose()).cwiseAbs().maxCoeff() >
        1e-12 * (1.0 + omega_sq.cwiseAbs().maxCoeff()))
      throw std::invalid_argument("omega_sq must be symmetric");
    omega_sq_ = symmetrized(omega_sq);
    if (lambda_min_sym(omega_sq_) < -1e-10 * (1.0 + operator_norm_sym(omega_sq_)))
      throw std::invalid_argument("omega_sq must be positive semi-definite");
  }

  void check(const Eigen::VectorXd& x) const {
    if (x.size() != dim_) throw std::invalid_argument("point dimension mismatch");
  }

  Kind kind_;
  int dim_;
  Eigen::MatrixXd omega_sq_;
  double amplitude_ = 0.0;
  Eigen::VectorXd wavevector_;
  double hess_sup_ = 0.0;
  double third_sup_ = 0.0;
};

}  // namespace tcs
