#pragma once

// Gaussians on manifolds: X ~ N(mean, cov) with the covariance living in the
// tangent space at the mean. The frame tag says which minus defined it:
// Local uses right-minus (tangent at the mean, the library default), Global
// uses left-minus (tangent at the identity). The adjoint converts between
// the two. An explicit tag prevents silently mixing conventions.

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <random>
#include <stdexcept>

#include "liekit/core.hpp"

namespace liekit {

enum class Frame { Local, Global };

namespace detail {

template <int N>
Eigen::Matrix<double, N, N> repair_psd(const Eigen::Matrix<double, N, N>& cov) {
  using Mat = Eigen::Matrix<double, N, N>;
  if ((cov - cov.transpose()).norm() > 1e-12 * std::max(1.0, cov.norm()))
    throw std::invalid_argument("covariance is not symmetric");
  Mat sym = 0.5 * (cov + cov.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> eig(sym);
  auto evals = eig.eigenvalues();
  if (evals.minCoeff() < -1e-9) throw std::invalid_argument("covariance is not positive semi-definite");
  if (evals.minCoeff() < 0.0) {
    const Mat fixed =
        eig.eigenvectors() * evals.cwiseMax(0.0).asDiagonal() * eig.eigenvectors().transpose();
    return 0.5 * (fixed + fixed.transpose());
  }
  return sym;
}

}  // namespace detail

template <LieGroup G>
class GaussianState {
 public:
  static constexpr int kDof = G::kDof;
  using Cov = Eigen::Matrix<double, kDof, kDof>;
  using Tangent = typename G::Tangent;

  GaussianState(G mean, const Cov& cov, Frame frame = Frame::Local)
      : mean_(std::move(mean)), cov_(detail::repair_psd<kDof>(cov)), frame_(frame) {}

  const G& mean() const { return mean_; }
  const Cov& cov() const { return cov_; }
  Frame frame() const { return frame_; }

  /// Draws X = mean (+) tau (local) or tau (+) mean (global), tau ~ N(0, cov).
  G sample(std::mt19937_64& rng) const {
    const Eigen::LLT<Cov> llt(cov_ + 1e-12 * Cov::Identity());
    std::normal_distribution<double> gauss(0.0, 1.0);
    Tangent unit;
    for (int i = 0; i < kDof; ++i) unit(i) = gauss(rng);
    const Tangent tau = llt.matrixL() * unit;
    return frame_ == Frame::Local ? rplus(mean_, tau) : lplus(tau, mean_);
  }

 private:
  G mean_;
  Cov cov_;
  Frame frame_;
};

/// Pushes a Gaussian through f with the given Jacobian: mean' = f(mean),
/// cov' = J cov J^T (symmetrized). J must be the right Jacobian for Local
/// states and the left Jacobian for Global ones.
template <LieGroup GOut, LieGroup GIn, class F>
GaussianState<GOut> propagate(const GaussianState<GIn>& state, const F& f,
                              const Eigen::Matrix<double, GOut::kDof, GIn::kDof>& jac) {
  using Cov = typename GaussianState<GOut>::Cov;
  const Cov cov = jac * state.cov() * jac.transpose();
  return GaussianState<GOut>(f(state.mean()), Cov(0.5 * (cov + cov.transpose())), state.frame());
}

/// Global covariance from a local one: Sigma_E = Ad_X Sigma_X Ad_X^T.
template <LieGroup G>
typename GaussianState<G>::Cov local_to_global_cov(const G& x,
                                                   const typename GaussianState<G>::Cov& cov_local) {
  const auto adj = x.adjoint();
  return adj * cov_local * adj.transpose();
}

template <LieGroup G>
typename GaussianState<G>::Cov global_to_local_cov(const G& x,
                                                   const typename GaussianState<G>::Cov& cov_global) {
  const auto adj_inv = x.inverse().adjoint();
  return adj_inv * cov_global * adj_inv.transpose();
}

}  // namespace liekit
