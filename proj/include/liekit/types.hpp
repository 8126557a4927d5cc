#pragma once

#include <Eigen/Dense>

namespace liekit {

using Vec1 = Eigen::Matrix<double, 1, 1>;
using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using VecX = Eigen::VectorXd;

using Mat1 = Eigen::Matrix<double, 1, 1>;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using MatX = Eigen::MatrixXd;

using Mat2x1 = Eigen::Matrix<double, 2, 1>;
using Mat2x3 = Eigen::Matrix<double, 2, 3>;
using Mat3x2 = Eigen::Matrix<double, 3, 2>;
using Mat3x6 = Eigen::Matrix<double, 3, 6>;

/// 2D skew generator [1]x = [[0,-1],[1,0]], so that [1]x * v rotates v by +90 deg.
inline Mat2 hat1() {
  Mat2 m;
  m << 0.0, -1.0, 1.0, 0.0;
  return m;
}

/// 3D skew-symmetric matrix such that hat3(a) * b = a x b.
inline Mat3 hat3(const Vec3& v) {
  Mat3 m;
  // clang-format off
  m <<     0.0, -v.z(),  v.y(),
         v.z(),    0.0, -v.x(),
        -v.y(),  v.x(),    0.0;
  // clang-format on
  return m;
}

inline Vec3 vee3(const Mat3& m) { return Vec3(m(2, 1), m(0, 2), m(1, 0)); }

}  // namespace liekit
