#pragma once

// Group contract shared by all concrete groups: composition, inverse,
// Exp/Log, right/left plus-minus, adjoint. Perturbations are plain tangent
// vectors in R^m; Lie-algebra matrix forms stay internal to each group.
//
// The right forms of plus/minus are the default throughout this library;
// the left forms are separate, explicitly named operations.

#include <concepts>
#include <stdexcept>
#include <type_traits>

#include "liekit/types.hpp"

namespace liekit {

template <class G>
concept LieGroup = requires(const G& x, const G& y, const typename G::Tangent& tau) {
  { G::kDof } -> std::convertible_to<int>;
  { G::Exp(tau) } -> std::same_as<G>;
  { x.log() } -> std::same_as<typename G::Tangent>;
  { x.inverse() } -> std::same_as<G>;
  { x* y } -> std::same_as<G>;
  { x.adjoint() };
};

// ---------------------------------------------------------------------------
// Plus / minus
// ---------------------------------------------------------------------------

/// Right-plus: X o Exp(tau), with tau in the local frame at X.
template <LieGroup G>
G rplus(const G& x, const typename G::Tangent& tau) {
  return x * G::Exp(tau);
}

/// Right-minus: Log(X^-1 o Y), the tangent at X taking X to Y.
template <LieGroup G>
typename G::Tangent rminus(const G& y, const G& x) {
  return (x.inverse() * y).log();
}

/// Left-plus: Exp(tau) o X, with tau in the global frame (at the identity).
template <LieGroup G>
G lplus(const typename G::Tangent& tau, const G& x) {
  return G::Exp(tau) * x;
}

/// Left-minus: Log(Y o X^-1).
template <LieGroup G>
typename G::Tangent lminus(const G& y, const G& x) {
  return (y * x.inverse()).log();
}

// The vector groups (R^n, +): plus and minus are ordinary addition, and all
// elements are their own tangent coordinates.

template <typename Derived, typename OtherDerived>
auto rplus(const Eigen::MatrixBase<Derived>& x, const Eigen::MatrixBase<OtherDerived>& tau) {
  return (x + tau).eval();
}

template <typename Derived, typename OtherDerived>
auto rminus(const Eigen::MatrixBase<Derived>& y, const Eigen::MatrixBase<OtherDerived>& x) {
  return (y - x).eval();
}

template <typename Derived, typename OtherDerived>
auto lplus(const Eigen::MatrixBase<Derived>& tau, const Eigen::MatrixBase<OtherDerived>& x) {
  return (tau + x).eval();
}

template <typename Derived, typename OtherDerived>
auto lminus(const Eigen::MatrixBase<Derived>& y, const Eigen::MatrixBase<OtherDerived>& x) {
  return (y - x).eval();
}

// ---------------------------------------------------------------------------
// Degrees of freedom and zero tangents, for generic code
// ---------------------------------------------------------------------------

template <LieGroup G>
constexpr int dof_of(const G&) {
  return G::kDof;
}

template <typename Derived>
int dof_of(const Eigen::MatrixBase<Derived>& v) {
  return static_cast<int>(v.size());
}

template <LieGroup G>
typename G::Tangent zero_tangent(const G&) {
  return G::Tangent::Zero();
}

template <typename Derived>
typename Derived::PlainObject zero_tangent(const Eigen::MatrixBase<Derived>& v) {
  return Derived::PlainObject::Zero(v.rows(), v.cols());
}

// ---------------------------------------------------------------------------
// Adjoint-based identities
// ---------------------------------------------------------------------------

/// Chain rule: J_zx = J_zy * J_yx.
template <typename DA, typename DB>
MatX jac_chain(const Eigen::MatrixBase<DA>& j_zy, const Eigen::MatrixBase<DB>& j_yx) {
  if (j_zy.cols() != j_yx.rows()) throw std::invalid_argument("jac_chain: inner dimensions disagree");
  return j_zy * j_yx;
}

/// Crossed Jacobian mapping local domain tangents to global codomain tangents:
/// J^{E}_{X} = Ad_N(f(X)) * J^{Y}_{X}.
template <typename DJ, typename DA>
MatX jac_crossed_rl(const Eigen::MatrixBase<DJ>& j_right, const Eigen::MatrixBase<DA>& adj_codomain) {
  if (adj_codomain.rows() != adj_codomain.cols() || adj_codomain.cols() != j_right.rows())
    throw std::invalid_argument("jac_crossed_rl: dimension mismatch");
  return adj_codomain * j_right;
}

/// Crossed Jacobian mapping global domain tangents to local codomain tangents:
/// J^{Y}_{E} = J^{Y}_{X} * Ad_M(X)^-1.
template <typename DJ, typename DA>
MatX jac_crossed_lr(const Eigen::MatrixBase<DJ>& j_right, const Eigen::MatrixBase<DA>& adj_domain) {
  if (adj_domain.rows() != adj_domain.cols() || j_right.cols() != adj_domain.rows())
    throw std::invalid_argument("jac_crossed_lr: dimension mismatch");
  return j_right * adj_domain.inverse();
}

/// Left Jacobian from the right one: J^L = Ad(f(X)) * J^R * Ad(X)^-1.
template <typename DJ, typename DA, typename DB>
MatX jac_left_from_right(const Eigen::MatrixBase<DJ>& j_right, const Eigen::MatrixBase<DA>& adj_codomain,
                         const Eigen::MatrixBase<DB>& adj_domain) {
  return adj_codomain * j_right * adj_domain.inverse();
}

// ---------------------------------------------------------------------------
// Generic elementary Jacobian blocks (valid in every group)
// ---------------------------------------------------------------------------

/// d(X^-1) / dX = -Ad(X).
template <LieGroup G>
typename G::Jacobian jac_inverse(const G& x) {
  return -x.adjoint();
}

/// d(X o Y) / dX = Ad(Y)^-1, implemented as Ad(Y^-1).
template <LieGroup G>
typename G::Jacobian jac_compose_lhs(const G&, const G& y) {
  return y.inverse().adjoint();
}

/// d(X o Y) / dY = I.
template <LieGroup G>
typename G::Jacobian jac_compose_rhs(const G&, const G&) {
  return G::Jacobian::Identity();
}

/// d(X (+) tau) / dX = Ad(Exp(tau))^-1, implemented as Ad(Exp(-tau)).
template <LieGroup G>
typename G::Jacobian jac_rplus_wrt_x(const typename G::Tangent& tau) {
  return G::Exp(-tau).adjoint();
}

/// d(X (+) tau) / dtau = Jr(tau).
template <LieGroup G>
typename G::Jacobian jac_rplus_wrt_tau(const typename G::Tangent& tau) {
  return G::jr(tau);
}

/// d(Y (-) X) / dY = Jr^-1(tau), with tau = Y (-) X.
template <LieGroup G>
typename G::Jacobian jac_rminus_wrt_y(const typename G::Tangent& tau) {
  return G::jr_inv(tau);
}

/// d(Y (-) X) / dX = -Jl^-1(tau), with tau = Y (-) X.
template <LieGroup G>
typename G::Jacobian jac_rminus_wrt_x(const typename G::Tangent& tau) {
  return -G::jl_inv(tau);
}

/// d(Log(X)) / dX = Jr^-1(Log(X)).
template <LieGroup G>
typename G::Jacobian jac_log(const G& x) {
  return G::jr_inv(x.log());
}

}  // namespace liekit
