#pragma once

// 3D rotations: S^3 (unit quaternions, storage order w,x,y,z) and SO(3)
// (3x3 rotation matrices). Both share the rotation-vector tangent theta*u,
// so the Jacobian blocks below apply to either representation.
//
// All closed forms switch to their 2nd-order Taylor expansions below
// kSmallAngle, keeping relative error under ~1e-10 across the branch.

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "liekit/angle.hpp"
#include "liekit/types.hpp"

namespace liekit {

inline constexpr double kSmallAngle = 1e-4;

namespace so3_detail {

// sin(t)/t and (1-cos(t))/t^2 with series fallbacks.
inline double sinc(double t) {
  if (std::abs(t) < kSmallAngle) {
    const double t2 = t * t;
    return 1.0 - t2 / 6.0 + t2 * t2 / 120.0;
  }
  return std::sin(t) / t;
}

inline double one_minus_cos_over_t2(double t) {
  if (std::abs(t) < kSmallAngle) {
    const double t2 = t * t;
    return 0.5 - t2 / 24.0 + t2 * t2 / 720.0;
  }
  // 2 sin^2(t/2)/t^2 avoids the 1 - cos cancellation.
  const double s = std::sin(0.5 * t);
  return 2.0 * s * s / (t * t);
}

inline double t_minus_sin_over_t3(double t) {
  if (std::abs(t) < kSmallAngle) {
    const double t2 = t * t;
    return 1.0 / 6.0 - t2 / 120.0 + t2 * t2 / 5040.0;
  }
  return (t - std::sin(t)) / (t * t * t);
}

// Coefficient of the skew^2 term in Jr^-1 and Jl^-1:
// 1/t^2 - (1+cos t)/(2 t sin t), series 1/12 + t^2/720 + t^4/30240.
inline double jinv_coeff(double t) {
  if (std::abs(t) < kSmallAngle) {
    const double t2 = t * t;
    return 1.0 / 12.0 + t2 / 720.0 + t2 * t2 / 30240.0;
  }
  return 1.0 / (t * t) - (1.0 + std::cos(t)) / (2.0 * t * std::sin(t));
}

}  // namespace so3_detail

/// Right Jacobian of SO(3): I - (1-cos)/t^2 [w]x + (t-sin)/t^3 [w]x^2.
inline Mat3 so3_jr(const Vec3& theta) {
  const double t = theta.norm();
  const Mat3 w = hat3(theta);
  return Mat3::Identity() - so3_detail::one_minus_cos_over_t2(t) * w +
         so3_detail::t_minus_sin_over_t3(t) * w * w;
}

inline Mat3 so3_jr_inv(const Vec3& theta) {
  const double t = theta.norm();
  const Mat3 w = hat3(theta);
  return Mat3::Identity() + 0.5 * w + so3_detail::jinv_coeff(t) * w * w;
}

/// Left Jacobian of SO(3); equals so3_jr(theta) transposed.
inline Mat3 so3_jl(const Vec3& theta) {
  const double t = theta.norm();
  const Mat3 w = hat3(theta);
  return Mat3::Identity() + so3_detail::one_minus_cos_over_t2(t) * w +
         so3_detail::t_minus_sin_over_t3(t) * w * w;
}

inline Mat3 so3_jl_inv(const Vec3& theta) {
  const double t = theta.norm();
  const Mat3 w = hat3(theta);
  return Mat3::Identity() - 0.5 * w + so3_detail::jinv_coeff(t) * w * w;
}

/// Rodrigues formula: R = I + sin(t) [u]x + (1-cos(t)) [u]x^2.
inline Mat3 so3_exp_matrix(const Vec3& theta) {
  const double t = theta.norm();
  const Mat3 w = hat3(theta);
  return Mat3::Identity() + so3_detail::sinc(t) * w + so3_detail::one_minus_cos_over_t2(t) * w * w;
}

/// 3x3 rotation matrix.
class Rot3 {
 public:
  static constexpr int kDof = 3;
  using Tangent = Vec3;
  using Jacobian = Mat3;

  Rot3() : m_(Mat3::Identity()) {}
  explicit Rot3(const Mat3& m) : m_(m) {
    if ((m.transpose() * m - Mat3::Identity()).norm() > 1e-9 || m.determinant() < 0.0)
      throw std::invalid_argument("Rot3: matrix is not a proper rotation");
  }

  static Rot3 Identity() { return Rot3(); }

  static Rot3 Exp(const Tangent& theta) {
    Rot3 r;
    r.m_ = so3_exp_matrix(theta);
    return r;
  }

  /// Rotation vector theta*u with theta in [0, pi]. The (R - R^T) formula
  /// degenerates as sin(theta) -> 0, so the antipode neighborhood extracts
  /// the axis from the largest diagonal element instead.
  Tangent log(bool strict = false) const {
    const Vec3 axial = vee3(m_ - m_.transpose());  // = 2 sin(t) u
    const double c = std::clamp((m_.trace() - 1.0) / 2.0, -1.0, 1.0);
    // atan2 keeps full precision at both ends, where acos(c) degrades.
    const double t = std::atan2(0.5 * axial.norm(), c);
    if (strict && t > kPi - 1e-9) throw std::domain_error("Rot3::log: angle at the injectivity radius");

    if (t < kSmallAngle) {
      const double t2 = t * t;
      return (0.5 + t2 / 12.0 + 7.0 * t2 * t2 / 720.0) * axial;
    }
    if (t > kPi - 1e-4) {
      int i = 0;
      m_.diagonal().maxCoeff(&i);
      const int j = (i + 1) % 3, k = (i + 2) % 3;
      const double one_minus_c = 1.0 - c;
      Vec3 u;
      u(i) = std::sqrt(std::max(0.0, (m_(i, i) - c) / one_minus_c));
      u(j) = (m_(i, j) + m_(j, i)) / (2.0 * one_minus_c * u(i));
      u(k) = (m_(i, k) + m_(k, i)) / (2.0 * one_minus_c * u(i));
      if (axial.dot(u) < 0.0) u = -u;  // sin(t) >= 0 on the principal branch
      return t * u.normalized();
    }
    return (t / (2.0 * std::sin(t))) * axial;
  }

  Rot3 inverse() const {
    Rot3 r;
    r.m_ = m_.transpose();
    return r;
  }

  Rot3 operator*(const Rot3& o) const {
    Rot3 r;
    r.m_ = m_ * o.m_;
    return r;
  }

  /// Ad_R = R.
  Jacobian adjoint() const { return m_; }

  Vec3 act(const Vec3& v) const { return m_ * v; }

  const Mat3& matrix() const { return m_; }

  static Jacobian jr(const Tangent& t) { return so3_jr(t); }
  static Jacobian jr_inv(const Tangent& t) { return so3_jr_inv(t); }
  static Jacobian jl(const Tangent& t) { return so3_jl(t); }
  static Jacobian jl_inv(const Tangent& t) { return so3_jl_inv(t); }

  /// d(R.v)/dR = -R [v]x.
  static Mat3 jac_act_group(const Rot3& r, const Vec3& v) { return -r.m_ * hat3(v); }
  /// d(R.v)/dv = R.
  static Mat3 jac_act_point(const Rot3& r, const Vec3&) { return r.m_; }

 private:
  Mat3 m_;
};

/// Unit quaternion q = w + xi + yj + zk, Hamilton convention.
/// The tangent is the full rotation vector: Exp uses the half angle, and the
/// hat/vee factor 2 accounts for the double effect of q in q x q*.
class UnitQuaternion {
 public:
  static constexpr int kDof = 3;
  using Tangent = Vec3;
  using Jacobian = Mat3;

  UnitQuaternion() : w_(1.0), x_(0.0), y_(0.0), z_(0.0) {}
  UnitQuaternion(double w, double x, double y, double z) : w_(w), x_(x), y_(y), z_(z) { renormalize(); }

  static UnitQuaternion Identity() { return UnitQuaternion(); }

  /// q = cos(theta/2) + u sin(theta/2).
  static UnitQuaternion Exp(const Tangent& theta) {
    const double t = theta.norm();
    const double k = 0.5 * so3_detail::sinc(0.5 * t);  // sin(t/2)/t
    return UnitQuaternion(std::cos(0.5 * t), k * theta.x(), k * theta.y(), k * theta.z());
  }

  /// theta*u = 2 v atan2(|v|, w)/|v|, after bringing q to the w >= 0 cover.
  Tangent log(bool strict = false) const {
    double w = w_;
    Vec3 v(x_, y_, z_);
    if (w < 0.0) {  // double cover: -q is the same rotation
      w = -w;
      v = -v;
    }
    const double n = v.norm();
    if (strict && 2.0 * std::atan2(n, w) > kPi - 1e-9)
      throw std::domain_error("UnitQuaternion::log: angle at the injectivity radius");
    if (n < 1e-9) return (2.0 / w) * v;
    return (2.0 * std::atan2(n, w) / n) * v;
  }

  UnitQuaternion inverse() const { return UnitQuaternion(w_, -x_, -y_, -z_); }

  /// Hamilton product.
  UnitQuaternion operator*(const UnitQuaternion& o) const {
    return UnitQuaternion(w_ * o.w_ - x_ * o.x_ - y_ * o.y_ - z_ * o.z_,
                          w_ * o.x_ + x_ * o.w_ + y_ * o.z_ - z_ * o.y_,
                          w_ * o.y_ - x_ * o.z_ + y_ * o.w_ + z_ * o.x_,
                          w_ * o.z_ + x_ * o.y_ - y_ * o.x_ + z_ * o.w_);
  }

  /// Ad_q = R(q).
  Jacobian adjoint() const { return matrix(); }

  /// Rotation action by the double product q x q*.
  Vec3 act(const Vec3& p) const {
    // (0, p') = q (0, p) q*, expanded to avoid renormalizing intermediates.
    const Vec3 v(x_, y_, z_);
    const Vec3 t = 2.0 * v.cross(p);
    return p + w_ * t + v.cross(t);
  }

  /// The equivalent rotation matrix.
  Mat3 matrix() const {
    const double w = w_, x = x_, y = y_, z = z_;
    Mat3 m;
    // clang-format off
    m << w*w + x*x - y*y - z*z,       2.0*(x*y - w*z),       2.0*(x*z + w*y),
               2.0*(x*y + w*z), w*w - x*x + y*y - z*z,       2.0*(y*z - w*x),
               2.0*(x*z - w*y),       2.0*(y*z + w*x), w*w - x*x - y*y + z*z;
    // clang-format on
    return m;
  }

  double w() const { return w_; }
  double x() const { return x_; }
  double y() const { return y_; }
  double z() const { return z_; }

  static Jacobian jr(const Tangent& t) { return so3_jr(t); }
  static Jacobian jr_inv(const Tangent& t) { return so3_jr_inv(t); }
  static Jacobian jl(const Tangent& t) { return so3_jl(t); }
  static Jacobian jl_inv(const Tangent& t) { return so3_jl_inv(t); }

  static Mat3 jac_act_group(const UnitQuaternion& q, const Vec3& v) { return -q.matrix() * hat3(v); }
  static Mat3 jac_act_point(const UnitQuaternion& q, const Vec3&) { return q.matrix(); }

 private:
  void renormalize() {
    const double n = std::sqrt(w_ * w_ + x_ * x_ + y_ * y_ + z_ * z_);
    if (!(n > 0.0) || !std::isfinite(n)) throw std::invalid_argument("UnitQuaternion: zero or non-finite norm");
    w_ /= n;
    x_ /= n;
    y_ /= n;
    z_ /= n;
  }

  double w_, x_, y_, z_;
};

inline Rot3 to_rot3(const UnitQuaternion& q) { return Rot3(q.matrix()); }

inline UnitQuaternion to_unit_quaternion(const Rot3& r) {
  // Shepperd's method: pick the largest of w,x,y,z from the diagonal.
  const Mat3& m = r.matrix();
  const double tr = m.trace();
  if (tr > 0.0) {
    const double s = std::sqrt(tr + 1.0) * 2.0;
    return UnitQuaternion(0.25 * s, (m(2, 1) - m(1, 2)) / s, (m(0, 2) - m(2, 0)) / s, (m(1, 0) - m(0, 1)) / s);
  }
  if (m(0, 0) > m(1, 1) && m(0, 0) > m(2, 2)) {
    const double s = std::sqrt(1.0 + m(0, 0) - m(1, 1) - m(2, 2)) * 2.0;
    return UnitQuaternion((m(2, 1) - m(1, 2)) / s, 0.25 * s, (m(0, 1) + m(1, 0)) / s, (m(0, 2) + m(2, 0)) / s);
  }
  if (m(1, 1) > m(2, 2)) {
    const double s = std::sqrt(1.0 + m(1, 1) - m(0, 0) - m(2, 2)) * 2.0;
    return UnitQuaternion((m(0, 2) - m(2, 0)) / s, (m(0, 1) + m(1, 0)) / s, 0.25 * s, (m(1, 2) + m(2, 1)) / s);
  }
  const double s = std::sqrt(1.0 + m(2, 2) - m(0, 0) - m(1, 1)) * 2.0;
  return UnitQuaternion((m(1, 0) - m(0, 1)) / s, (m(0, 2) + m(2, 0)) / s, (m(1, 2) + m(2, 1)) / s, 0.25 * s);
}

}  // namespace liekit
