#pragma once

// SE(3) rigid motions. Tangent ordering is tau = (rho, theta) in R^6.
// The left Jacobian uses Barfoot's Q(rho, theta) block; the right Jacobian
// follows from Jr(rho, theta) = Jl(-rho, -theta).

#include <cmath>

#include "liekit/rot3.hpp"
#include "liekit/types.hpp"

namespace liekit {

namespace se3_detail {

// Series-guarded coefficients of Q(rho, theta). The quartic and quintic
// denominators cancel catastrophically well above the usual small-angle
// threshold, so these two switch to their series already at 1e-2, where the
// kept terms are still exact to machine precision.
inline constexpr double kSmallAngleQ = 1e-2;

inline double q_coeff1(double t) {  // (t - sin t)/t^3
  return so3_detail::t_minus_sin_over_t3(t);
}

inline double q_coeff2(double t) {  // (1 - t^2/2 - cos t)/t^4 -> -1/24
  if (std::abs(t) < kSmallAngleQ) {
    const double t2 = t * t;
    return -1.0 / 24.0 + t2 / 720.0 - t2 * t2 / 40320.0;
  }
  const double t2 = t * t;
  return (1.0 - 0.5 * t2 - std::cos(t)) / (t2 * t2);
}

inline double q_coeff3(double t) {  // (t - sin t - t^3/6)/t^5 -> -1/120
  if (std::abs(t) < kSmallAngleQ) {
    const double t2 = t * t;
    return -1.0 / 120.0 + t2 / 5040.0 - t2 * t2 / 362880.0;
  }
  const double t2 = t * t;
  return (t - std::sin(t) - t * t2 / 6.0) / (t2 * t2 * t);
}

}  // namespace se3_detail

/// Upper-right block of the SE(3) left Jacobian (Barfoot's closed form).
inline Mat3 se3_Q(const Vec3& rho, const Vec3& theta) {
  const double t = theta.norm();
  const Mat3 rx = hat3(rho);
  const Mat3 tx = hat3(theta);
  const double c1 = se3_detail::q_coeff1(t);
  const double c2 = se3_detail::q_coeff2(t);
  const double c3 = se3_detail::q_coeff3(t);
  const Mat3 txrx = tx * rx;
  const Mat3 rxtx = rx * tx;
  const Mat3 txrxtx = txrx * tx;
  return 0.5 * rx + c1 * (txrx + rxtx + txrxtx) - c2 * (tx * txrx + rxtx * tx - 3.0 * txrxtx) -
         0.5 * (c2 - 3.0 * c3) * (txrxtx * tx + tx * txrxtx);
}

/// 3D rigid motion (R, t) ~ [[R, t], [0, 1]].
class Pose3 {
 public:
  static constexpr int kDof = 6;
  using Tangent = Vec6;  // (rho, theta)
  using Jacobian = Mat6;
  using Point = Vec3;

  Pose3() = default;
  Pose3(const Rot3& r, const Vec3& t) : r_(r), t_(t) {}

  static Pose3 Identity() { return Pose3(); }

  /// M = [[Exp(theta), V(theta) rho], [0, 1]], with V = Jl of SO(3).
  static Pose3 Exp(const Tangent& tau) {
    const Vec3 rho = tau.head<3>();
    const Vec3 theta = tau.tail<3>();
    return Pose3(Rot3::Exp(theta), so3_jl(theta) * rho);
  }

  Tangent log() const {
    const Vec3 theta = r_.log();
    Tangent tau;
    tau.head<3>() = so3_jl_inv(theta) * t_;
    tau.tail<3>() = theta;
    return tau;
  }

  Pose3 inverse() const {
    const Rot3 rinv = r_.inverse();
    return Pose3(rinv, -rinv.act(t_));
  }

  Pose3 operator*(const Pose3& o) const { return Pose3(r_ * o.r_, t_ + r_.act(o.t_)); }

  /// Ad = [[R, [t]x R], [0, R]].
  Jacobian adjoint() const {
    Jacobian adj = Jacobian::Zero();
    adj.topLeftCorner<3, 3>() = r_.matrix();
    adj.topRightCorner<3, 3>() = hat3(t_) * r_.matrix();
    adj.bottomRightCorner<3, 3>() = r_.matrix();
    return adj;
  }

  Vec3 act(const Vec3& p) const { return t_ + r_.act(p); }

  const Rot3& rotation() const { return r_; }
  const Vec3& translation() const { return t_; }

  Mat4 matrix() const {
    Mat4 m = Mat4::Identity();
    m.topLeftCorner<3, 3>() = r_.matrix();
    m.topRightCorner<3, 1>() = t_;
    return m;
  }

  static Jacobian jl(const Tangent& tau) {
    const Vec3 rho = tau.head<3>();
    const Vec3 theta = tau.tail<3>();
    const Mat3 jl_rot = so3_jl(theta);
    Jacobian j = Jacobian::Zero();
    j.topLeftCorner<3, 3>() = jl_rot;
    j.topRightCorner<3, 3>() = se3_Q(rho, theta);
    j.bottomRightCorner<3, 3>() = jl_rot;
    return j;
  }

  static Jacobian jl_inv(const Tangent& tau) {
    const Vec3 rho = tau.head<3>();
    const Vec3 theta = tau.tail<3>();
    const Mat3 jl_inv_rot = so3_jl_inv(theta);
    Jacobian j = Jacobian::Zero();
    j.topLeftCorner<3, 3>() = jl_inv_rot;
    j.topRightCorner<3, 3>() = -jl_inv_rot * se3_Q(rho, theta) * jl_inv_rot;
    j.bottomRightCorner<3, 3>() = jl_inv_rot;
    return j;
  }

  static Jacobian jr(const Tangent& tau) { return jl(-tau); }
  static Jacobian jr_inv(const Tangent& tau) { return jl_inv(-tau); }

  /// d(M.p)/dM = [R  -R [p]x].
  static Mat3x6 jac_act_group(const Pose3& m, const Vec3& p) {
    Mat3x6 j;
    j.leftCols<3>() = m.r_.matrix();
    j.rightCols<3>() = -m.r_.matrix() * hat3(p);
    return j;
  }
  static Mat3 jac_act_point(const Pose3& m, const Vec3&) { return m.r_.matrix(); }

 private:
  Rot3 r_;
  Vec3 t_ = Vec3::Zero();
};

}  // namespace liekit
