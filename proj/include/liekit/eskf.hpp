#pragma once

// Error-state Kalman filter for landmark-based localization. The mean lives
// on the pose manifold, the error and its covariance in the local tangent
// space. Prediction and correction are the standard EKF algebra with plus
// replaced by the right-plus; the Jacobians come from the group blocks:
//   F = Ad(Exp(u))^-1,  G = Jr(u),  H = J_act(X^-1, b) * (-Ad(X)).
// The same code runs on SE(2) and SE(3); only the sizes change.

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <stdexcept>

#include "liekit/core.hpp"

namespace liekit {

template <LieGroup Pose>
class Eskf {
 public:
  static constexpr int kDof = Pose::kDof;
  using Tangent = typename Pose::Tangent;
  using StateCov = Eigen::Matrix<double, kDof, kDof>;
  using Point = typename Pose::Point;
  static constexpr int kMeasDim = Point::RowsAtCompileTime;
  using MeasCov = Eigen::Matrix<double, kMeasDim, kMeasDim>;
  using MeasJac = Eigen::Matrix<double, kMeasDim, kDof>;

  Eskf(Pose initial_mean, const StateCov& initial_cov)
      : mean_(std::move(initial_mean)), cov_(initial_cov) {}

  const Pose& mean() const { return mean_; }
  const StateCov& cov() const { return cov_; }

  /// Applies a pre-integrated control u with process covariance w.
  void predict(const Tangent& u, const StateCov& w) {
    check_psd(w, "Eskf::predict: process covariance");
    const StateCov f = jac_rplus_wrt_x<Pose>(u);
    const StateCov g = jac_rplus_wrt_tau<Pose>(u);
    mean_ = rplus(mean_, u);
    cov_ = f * cov_ * f.transpose() + g * w * g.transpose();
    symmetrize();
  }

  /// Measurement Jacobian of y = X^-1 . b, chained from the action and
  /// inversion blocks.
  MeasJac measurement_jacobian(const Point& beacon) const {
    return Pose::jac_act_group(mean_.inverse(), beacon) * (-mean_.adjoint());
  }

  Point predict_measurement(const Point& beacon) const { return mean_.inverse().act(beacon); }

  /// Corrects with a beacon observation y of a known beacon position.
  void correct(const Point& beacon, const Point& y, const MeasCov& n) {
    const MeasJac h = measurement_jacobian(beacon);
    const Point innovation = y - predict_measurement(beacon);
    const MeasCov z = h * cov_ * h.transpose() + n;
    const Eigen::LDLT<MeasCov> ldlt(z);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
        ldlt.vectorD().minCoeff() < 1e-15 * std::max(1.0, ldlt.vectorD().maxCoeff()))
      throw std::runtime_error("Eskf::correct: singular innovation covariance");
    const Eigen::Matrix<double, kDof, kMeasDim> gain = cov_ * h.transpose() * ldlt.solve(MeasCov::Identity());
    mean_ = rplus(mean_, Tangent(gain * innovation));
    cov_ -= gain * z * gain.transpose();
    symmetrize();
  }

  /// Normalized estimation error squared against a reference pose.
  double nees(const Pose& truth) const {
    const Tangent err = rminus(truth, mean_);
    return err.dot(cov_.ldlt().solve(err));
  }

 private:
  void symmetrize() { cov_ = 0.5 * (cov_ + cov_.transpose()).eval(); }

  static void check_psd(const StateCov& m, const char* what) {
    if ((m - m.transpose()).norm() > 1e-9 * std::max(1.0, m.norm()))
      throw std::invalid_argument(std::string(what) + " is not symmetric");
    Eigen::SelfAdjointEigenSolver<StateCov> eig(m);
    if (eig.eigenvalues().minCoeff() < -1e-9)
      throw std::invalid_argument(std::string(what) + " is not positive semi-definite");
  }

  Pose mean_;
  StateCov cov_;
};

}  // namespace liekit
