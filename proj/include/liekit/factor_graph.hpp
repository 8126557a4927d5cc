#pragma once

// Graph-based smoothing and mapping: a composite state (poses, beacons and
// optional calibration blocks) plus typed factors, solved by Gauss-Newton
// on the normal equations. Residuals are whitened by Omega^{T/2}, the
// Cholesky factor U of the information matrix (U^T U = Omega), so that
// ||r||^2 equals the sum of e^T Omega e over factors.

#include <optional>
#include <stdexcept>
#include <vector>

#include "liekit/composite.hpp"
#include "liekit/se2.hpp"

namespace liekit {

/// Bias correction for the planar motion sensor: subtracts the (v, omega)
/// bias from a measured twist, leaving the lateral slot untouched.
inline Vec3 bias_correct(const Vec3& u_raw, const Vec2& c) {
  return Vec3(u_raw(0) - c(0), u_raw(1), u_raw(2) - c(1));
}

/// 3x2 Jacobian of bias_correct with respect to c.
inline Mat3x2 jac_bias_correct_wrt_c() {
  Mat3x2 j = Mat3x2::Zero();
  j(0, 0) = -1.0;
  j(2, 1) = -1.0;
  return j;
}

struct Factor {
  enum class Kind { kPrior, kMotion, kBeacon, kCalibratedMotion, kPreintMotion };

  Kind kind;
  std::vector<int> blocks;  // connected block handles; order fixed per kind
  VecX measurement;         // tangent u, point y, or raw control
  MatX sqrt_info;           // Omega^{T/2}
  std::optional<BlockValue> prior_value;

  // Pre-integrated diff-drive payload: the delta in (p, theta) coordinates,
  // its calibration Jacobian, and the calibration point it was built at.
  std::optional<Pose2> preint_delta;
  Mat3 preint_jc = Mat3::Zero();
  Vec3 preint_calib_ref = Vec3::Zero();

  int residual_dim() const { return static_cast<int>(sqrt_info.rows()); }
};

struct SolveOptions {
  int max_iters = 50;
  double step_tol = 1e-8;       // infinity norm of the update
  double cost_rel_tol = 1e-12;  // relative cost decrease
  double damping_initial = 1e-6;
  int max_damping_boosts = 12;
};

struct SolveReport {
  bool converged = false;
  int iterations = 0;
  double initial_cost = 0.0;
  double final_cost = 0.0;
  std::vector<double> accepted_costs;
};

class RankDeficiencyError : public std::runtime_error {
 public:
  RankDeficiencyError(int deficiency, int dof)
      : std::runtime_error("normal matrix is rank-deficient by " + std::to_string(deficiency) +
                           " of " + std::to_string(dof)),
        deficiency_(deficiency) {}
  int deficiency() const { return deficiency_; }

 private:
  int deficiency_;
};

class FactorGraph {
 public:
  explicit FactorGraph(Composite state) : state_(std::move(state)) {}

  // Factor constructors take the information matrix Omega and store its
  // upper Cholesky factor. They throw if Omega is not positive definite.
  int add_prior(int block, BlockValue measured, const MatX& info);
  int add_motion(int from, int to, VecX u, const MatX& info);
  int add_beacon(int pose, int beacon, VecX y, const MatX& info);
  int add_calibrated_motion(int calib, int from, int to, VecX u_raw, const MatX& info);
  int add_preint_motion(int calib, int from, int to, const Pose2& delta, const Mat3& jc,
                        const Vec3& calib_ref, const MatX& info);

  const Composite& state() const { return state_; }
  Composite& mutable_state() { return state_; }
  const std::vector<Factor>& factors() const { return factors_; }

  int residual_dim() const;

  /// Whitened residual of one factor at the current state.
  VecX factor_residual(const Factor& f) const;
  /// Stacked whitened residuals, in factor insertion order.
  VecX residuals() const;
  /// Dense total Jacobian with the block-sparse pattern of the graph.
  MatX jacobian() const;
  double cost() const { return residuals().squaredNorm(); }

  /// One Gauss-Newton step: dx = -(J^T J)^-1 J^T r. Throws
  /// RankDeficiencyError when the normal matrix is singular.
  VecX step() const;

  /// Iterates step / update until convergence, falling back to Levenberg
  /// damping whenever a plain step increases the cost.
  SolveReport solve(const SolveOptions& options = {});

  /// Number of near-zero singular values of J^T J.
  int rank_deficiency(double rel_tol = 1e-10) const;

  /// Dead-reckons poses from the prior through the motion factors and
  /// back-projects each beacon from its first measurement.
  void initialize_from_factors();

 private:
  int push_factor(Factor f, const MatX& info);
  void factor_jacobian(const Factor& f, MatX& jac, int row) const;
  double cost_at(Composite x);

  Composite state_;
  std::vector<Factor> factors_;
};

}  // namespace liekit
