#pragma once

// Numerical-derivative oracle. Every analytic Jacobian in the library is
// checked against these central differences, which use right-plus on the
// domain and right-minus on the codomain (left variants below).

#include <cmath>
#include <stdexcept>

#include "liekit/core.hpp"

namespace liekit {

namespace detail {
inline void check_finite(const Eigen::Ref<const VecX>& v, const char* what) {
  if (!v.allFinite()) throw std::runtime_error(std::string("jac_numeric: non-finite output of ") + what);
}
}  // namespace detail

/// Right Jacobian of f at x by central finite differences:
/// column i = [ (f(x (+) eps e_i) (-) f(x)) - (f(x (+) -eps e_i) (-) f(x)) ] / (2 eps).
template <class X, class F>
MatX jac_numeric(const F& f, const X& x, double eps = 1e-6) {
  if (!(eps > 0.0)) throw std::invalid_argument("jac_numeric: eps must be positive");
  const auto y0 = f(x);
  const int m = dof_of(x);
  const int n = dof_of(rminus(y0, y0));
  MatX jac(n, m);
  auto tau = zero_tangent(x);
  for (int i = 0; i < m; ++i) {
    tau.setZero();
    tau(i) = eps;
    const VecX sp = rminus(f(rplus(x, tau)), y0);
    tau(i) = -eps;
    const VecX sm = rminus(f(rplus(x, tau)), y0);
    detail::check_finite(sp, "f");
    detail::check_finite(sm, "f");
    jac.col(i) = (sp - sm) / (2.0 * eps);
  }
  return jac;
}

/// Left Jacobian of f at x: perturbations applied as tau (+) x on the domain
/// and lifted with left-minus on the codomain.
template <class X, class F>
MatX jac_numeric_left(const F& f, const X& x, double eps = 1e-6) {
  if (!(eps > 0.0)) throw std::invalid_argument("jac_numeric_left: eps must be positive");
  const auto y0 = f(x);
  const int m = dof_of(x);
  const int n = dof_of(lminus(y0, y0));
  MatX jac(n, m);
  auto tau = zero_tangent(x);
  for (int i = 0; i < m; ++i) {
    tau.setZero();
    tau(i) = eps;
    const VecX sp = lminus(f(lplus(tau, x)), y0);
    tau(i) = -eps;
    const VecX sm = lminus(f(lplus(tau, x)), y0);
    detail::check_finite(sp, "f");
    detail::check_finite(sm, "f");
    jac.col(i) = (sp - sm) / (2.0 * eps);
  }
  return jac;
}

/// Max entrywise relative error between an analytic Jacobian and its numeric
/// check. Absolute differences at or below the floor never count, so exact
/// zeros are not penalized for finite-difference noise; the floor scales
/// with the matrix magnitude so whitened (information-weighted) Jacobians
/// are treated consistently.
template <typename DA, typename DB>
double jac_rel_error(const Eigen::MatrixBase<DA>& analytic, const Eigen::MatrixBase<DB>& numeric,
                     double abs_floor = 1e-9) {
  if (analytic.rows() != numeric.rows() || analytic.cols() != numeric.cols())
    throw std::invalid_argument("jac_rel_error: shape mismatch");
  const double scale = std::max({1.0, analytic.cwiseAbs().maxCoeff(), numeric.cwiseAbs().maxCoeff()});
  const double floor = abs_floor * scale;
  double worst = 0.0;
  for (int r = 0; r < analytic.rows(); ++r) {
    for (int c = 0; c < analytic.cols(); ++c) {
      const double diff = std::abs(analytic(r, c) - numeric(r, c));
      if (diff <= floor) continue;
      worst = std::max(worst, diff / std::max(std::abs(analytic(r, c)), std::abs(numeric(r, c))));
    }
  }
  return worst;
}

}  // namespace liekit
