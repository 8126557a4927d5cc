#pragma once

// Planar rotations: S^1 (unit complex numbers) and SO(2) (2x2 rotation
// matrices). Both share the scalar tangent theta, so their Jacobian blocks
// are identical scalars; most of them are trivially +/-1.

#include <cmath>
#include <stdexcept>

#include "liekit/angle.hpp"
#include "liekit/types.hpp"

namespace liekit {

/// Unit complex number z = cos(theta) + i sin(theta).
class UnitComplex {
 public:
  static constexpr int kDof = 1;
  using Tangent = Vec1;
  using Jacobian = Mat1;

  UnitComplex() : re_(1.0), im_(0.0) {}
  UnitComplex(double re, double im) : re_(re), im_(im) { renormalize(); }

  static UnitComplex Identity() { return UnitComplex(); }

  /// Euler formula.
  static UnitComplex Exp(double theta) { return UnitComplex(std::cos(theta), std::sin(theta)); }
  static UnitComplex Exp(const Tangent& tau) { return Exp(tau(0)); }

  /// Principal angle in (-pi, pi].
  double angle() const { return std::atan2(im_, re_); }
  Tangent log() const { return Tangent(angle()); }

  UnitComplex inverse() const { return UnitComplex(re_, -im_); }

  UnitComplex operator*(const UnitComplex& o) const {
    return UnitComplex(re_ * o.re_ - im_ * o.im_, re_ * o.im_ + im_ * o.re_);
  }

  Jacobian adjoint() const { return Jacobian::Identity(); }

  /// Rotates a plane vector.
  Vec2 act(const Vec2& v) const { return Vec2(re_ * v.x() - im_ * v.y(), im_ * v.x() + re_ * v.y()); }

  double re() const { return re_; }
  double im() const { return im_; }
  double squared_norm_error() const { return std::abs(re_ * re_ + im_ * im_ - 1.0); }

  // Scalar Jacobian blocks; identical for S^1 and SO(2).
  static Jacobian jr(const Tangent&) { return Jacobian::Identity(); }
  static Jacobian jr_inv(const Tangent&) { return Jacobian::Identity(); }
  static Jacobian jl(const Tangent&) { return Jacobian::Identity(); }
  static Jacobian jl_inv(const Tangent&) { return Jacobian::Identity(); }

  /// d(z.v)/dz = R [1]x v (the representation-independent scalar slot).
  static Mat2x1 jac_act_group(const UnitComplex& z, const Vec2& v) {
    return z.act(Vec2(-v.y(), v.x()));
  }
  static Mat2 jac_act_point(const UnitComplex& z, const Vec2&) {
    Mat2 m;
    m << z.re(), -z.im(), z.im(), z.re();
    return m;
  }

 private:
  void renormalize() {
    const double n = std::sqrt(re_ * re_ + im_ * im_);
    if (!(n > 0.0) || !std::isfinite(n)) throw std::invalid_argument("UnitComplex: zero or non-finite norm");
    re_ /= n;
    im_ /= n;
  }

  double re_, im_;
};

/// 2x2 rotation matrix.
class Rot2 {
 public:
  static constexpr int kDof = 1;
  using Tangent = Vec1;
  using Jacobian = Mat1;

  Rot2() : c_(1.0), s_(0.0) {}
  explicit Rot2(const Mat2& m) : c_(m(0, 0)), s_(m(1, 0)) {
    if ((m.transpose() * m - Mat2::Identity()).norm() > 1e-9 || m.determinant() < 0.0)
      throw std::invalid_argument("Rot2: matrix is not a proper rotation");
    renormalize();
  }

  static Rot2 Identity() { return Rot2(); }
  static Rot2 Exp(double theta) { return Rot2(std::cos(theta), std::sin(theta)); }
  static Rot2 Exp(const Tangent& tau) { return Exp(tau(0)); }

  double angle() const { return std::atan2(s_, c_); }
  Tangent log() const { return Tangent(angle()); }

  Rot2 inverse() const { return Rot2(c_, -s_); }
  Rot2 operator*(const Rot2& o) const { return Rot2(c_ * o.c_ - s_ * o.s_, s_ * o.c_ + c_ * o.s_); }

  Jacobian adjoint() const { return Jacobian::Identity(); }

  Vec2 act(const Vec2& v) const { return Vec2(c_ * v.x() - s_ * v.y(), s_ * v.x() + c_ * v.y()); }

  Mat2 matrix() const {
    Mat2 m;
    m << c_, -s_, s_, c_;
    return m;
  }

  static Jacobian jr(const Tangent&) { return Jacobian::Identity(); }
  static Jacobian jr_inv(const Tangent&) { return Jacobian::Identity(); }
  static Jacobian jl(const Tangent&) { return Jacobian::Identity(); }
  static Jacobian jl_inv(const Tangent&) { return Jacobian::Identity(); }

  /// d(R.v)/dR = R [1]x v, a 2x1 block.
  static Mat2x1 jac_act_group(const Rot2& r, const Vec2& v) { return r.matrix() * (hat1() * v); }
  /// d(R.v)/dv = R.
  static Mat2 jac_act_point(const Rot2& r, const Vec2&) { return r.matrix(); }

 private:
  Rot2(double c, double s) : c_(c), s_(s) { renormalize(); }

  void renormalize() {
    const double n = std::sqrt(c_ * c_ + s_ * s_);
    c_ /= n;
    s_ /= n;
  }

  double c_, s_;
};

inline UnitComplex to_unit_complex(const Rot2& r) {
  const Mat2 m = r.matrix();
  return UnitComplex(m(0, 0), m(1, 0));
}

inline Rot2 to_rot2(const UnitComplex& z) {
  Mat2 m;
  m << z.re(), -z.im(), z.im(), z.re();
  return Rot2(m);
}

}  // namespace liekit
