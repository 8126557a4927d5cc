#pragma once

// The translation groups (R^n, +) and T(n). The primary representation is
// the bare vector: elements, Lie algebra and tangents all coincide, and
// Exp/Log are the identity. The homogeneous T(n) form is provided for
// cross-checks only.

#include "liekit/types.hpp"

namespace liekit {

template <int N>
using TransN = Eigen::Matrix<double, N, 1>;

template <int N>
TransN<N> trans_identity() {
  return TransN<N>::Zero();
}

template <int N>
TransN<N> trans_exp(const TransN<N>& t) {
  return t;
}

template <int N>
TransN<N> trans_log(const TransN<N>& t) {
  return t;
}

template <int N>
TransN<N> trans_compose(const TransN<N>& a, const TransN<N>& b) {
  return a + b;
}

template <int N>
TransN<N> trans_inverse(const TransN<N>& t) {
  return -t;
}

// Trivial Jacobian blocks: Ad = I, J_inv = -I, both composition blocks,
// Jr, Jl and the plus blocks are I, and the minus blocks are +/-I.

template <int N>
Eigen::Matrix<double, N, N> trans_adjoint(const TransN<N>&) {
  return Eigen::Matrix<double, N, N>::Identity();
}

template <int N>
Eigen::Matrix<double, N, N> trans_jac_inverse(const TransN<N>&) {
  return -Eigen::Matrix<double, N, N>::Identity();
}

template <int N>
Eigen::Matrix<double, N, N> trans_jr(const TransN<N>&) {
  return Eigen::Matrix<double, N, N>::Identity();
}

template <int N>
Eigen::Matrix<double, N, N> trans_jl(const TransN<N>&) {
  return Eigen::Matrix<double, N, N>::Identity();
}

/// Homogeneous-matrix form T = [[I, t], [0, 1]].
template <int N>
Eigen::Matrix<double, N + 1, N + 1> trans_matrix(const TransN<N>& t) {
  Eigen::Matrix<double, N + 1, N + 1> m = Eigen::Matrix<double, N + 1, N + 1>::Identity();
  m.template topRightCorner<N, 1>() = t;
  return m;
}

/// Lie-algebra form t^ = [[0, t], [0, 0]]; note (t^)^2 = 0.
template <int N>
Eigen::Matrix<double, N + 1, N + 1> trans_hat(const TransN<N>& t) {
  Eigen::Matrix<double, N + 1, N + 1> m = Eigen::Matrix<double, N + 1, N + 1>::Zero();
  m.template topRightCorner<N, 1>() = t;
  return m;
}

}  // namespace liekit
