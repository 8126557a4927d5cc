#pragma once

// SE(2) rigid motions. Tangent ordering is tau = (rho1, rho2, theta), and
// every Jacobian layout follows it.

#include <cmath>

#include "liekit/rot2.hpp"
#include "liekit/types.hpp"

namespace liekit {

namespace se2_detail {

// Scalar coefficient functions of the SE(2) Exp / Jacobian closed forms,
// with series fallbacks below kSmallAngle (shared threshold with SO(3)).
inline double sin_over_t(double t) {
  if (std::abs(t) < 1e-4) {
    const double t2 = t * t;
    return 1.0 - t2 / 6.0 + t2 * t2 / 120.0;
  }
  return std::sin(t) / t;
}

inline double one_minus_cos_over_t(double t) {
  if (std::abs(t) < 1e-4) {
    const double t2 = t * t;
    return 0.5 * t - t * t2 / 24.0 + t * t2 * t2 / 720.0;
  }
  // 2 sin^2(t/2)/t avoids the 1 - cos cancellation.
  const double s = std::sin(0.5 * t);
  return 2.0 * s * s / t;
}

inline double t_minus_sin_over_t2(double t) {
  if (std::abs(t) < 1e-4) {
    const double t2 = t * t;
    return t / 6.0 - t * t2 / 120.0 + t * t2 * t2 / 5040.0;
  }
  return (t - std::sin(t)) / (t * t);
}

inline double one_minus_cos_over_t2(double t) {
  if (std::abs(t) < 1e-4) {
    const double t2 = t * t;
    return 0.5 - t2 / 24.0 + t2 * t2 / 720.0;
  }
  const double s = std::sin(0.5 * t);
  return 2.0 * s * s / (t * t);
}

/// V(theta) = sin(t)/t I + (1-cos(t))/t [1]x.
inline Mat2 V(double t) {
  const double a = sin_over_t(t);
  const double b = one_minus_cos_over_t(t);
  Mat2 v;
  v << a, -b, b, a;
  return v;
}

/// Closed-form inverse of V (2x2 of the form aI + b[1]x).
inline Mat2 V_inv(double t) {
  const double a = sin_over_t(t);
  const double b = one_minus_cos_over_t(t);
  const double d = a * a + b * b;
  Mat2 v;
  v << a / d, b / d, -b / d, a / d;
  return v;
}

}  // namespace se2_detail

/// Planar rigid motion (R, t) ~ [[R, t], [0, 1]].
class Pose2 {
 public:
  static constexpr int kDof = 3;
  using Tangent = Vec3;  // (rho, theta)
  using Jacobian = Mat3;
  using Point = Vec2;

  Pose2() = default;
  Pose2(const Rot2& r, const Vec2& t) : r_(r), t_(t) {}
  Pose2(double x, double y, double theta) : r_(Rot2::Exp(theta)), t_(x, y) {}

  static Pose2 Identity() { return Pose2(); }

  static Pose2 Exp(const Tangent& tau) {
    const double theta = tau(2);
    return Pose2(Rot2::Exp(theta), se2_detail::V(theta) * tau.head<2>());
  }

  Tangent log() const {
    const double theta = r_.angle();
    Tangent tau;
    tau.head<2>() = se2_detail::V_inv(theta) * t_;
    tau(2) = theta;
    return tau;
  }

  Pose2 inverse() const {
    const Rot2 rinv = r_.inverse();
    return Pose2(rinv, -rinv.act(t_));
  }

  Pose2 operator*(const Pose2& o) const { return Pose2(r_ * o.r_, t_ + r_.act(o.t_)); }

  /// Ad = [[R, -[1]x t], [0, 1]].
  Jacobian adjoint() const {
    Jacobian adj = Jacobian::Identity();
    adj.topLeftCorner<2, 2>() = r_.matrix();
    adj.topRightCorner<2, 1>() = -hat1() * t_;
    return adj;
  }

  /// M.p = t + R p.
  Vec2 act(const Vec2& p) const { return t_ + r_.act(p); }

  const Rot2& rotation() const { return r_; }
  const Vec2& translation() const { return t_; }
  double angle() const { return r_.angle(); }

  Mat3 matrix() const {
    Mat3 m = Mat3::Identity();
    m.topLeftCorner<2, 2>() = r_.matrix();
    m.topRightCorner<2, 1>() = t_;
    return m;
  }

  static Jacobian jr(const Tangent& tau) {
    const double t = tau(2);
    const double a = se2_detail::sin_over_t(t);
    const double b = se2_detail::one_minus_cos_over_t(t);
    const double p = se2_detail::t_minus_sin_over_t2(t);
    const double q = se2_detail::one_minus_cos_over_t2(t);
    Jacobian j = Jacobian::Identity();
    j(0, 0) = a;
    j(0, 1) = b;
    j(1, 0) = -b;
    j(1, 1) = a;
    j(0, 2) = tau(0) * p - tau(1) * q;
    j(1, 2) = tau(0) * q + tau(1) * p;
    return j;
  }

  static Jacobian jl(const Tangent& tau) {
    const double t = tau(2);
    const double a = se2_detail::sin_over_t(t);
    const double b = se2_detail::one_minus_cos_over_t(t);
    const double p = se2_detail::t_minus_sin_over_t2(t);
    const double q = se2_detail::one_minus_cos_over_t2(t);
    Jacobian j = Jacobian::Identity();
    j(0, 0) = a;
    j(0, 1) = -b;
    j(1, 0) = b;
    j(1, 1) = a;
    j(0, 2) = tau(0) * p + tau(1) * q;
    j(1, 2) = -tau(0) * q + tau(1) * p;
    return j;
  }

  static Jacobian jr_inv(const Tangent& tau) { return jr(tau).inverse(); }
  static Jacobian jl_inv(const Tangent& tau) { return jl(tau).inverse(); }

  /// d(M.p)/dM = [R  R [1]x p].
  static Mat2x3 jac_act_group(const Pose2& m, const Vec2& p) {
    Mat2x3 j;
    j.leftCols<2>() = m.r_.matrix();
    j.col(2) = m.r_.act(hat1() * p);
    return j;
  }
  /// d(M.p)/dp = R.
  static Mat2 jac_act_point(const Pose2& m, const Vec2&) { return m.r_.matrix(); }

 private:
  Rot2 r_;
  Vec2 t_ = Vec2::Zero();
};

}  // namespace liekit
