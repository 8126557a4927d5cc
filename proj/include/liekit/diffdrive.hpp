#pragma once

// Differential-drive intrinsic self-calibration. Encoder increments are
// mapped to body magnitudes (arc length, heading change), integrated into
// SE(2) deltas along exact circle arcs (with a midpoint fallback for
// near-straight motion), and pre-integrated per segment together with a
// covariance and a calibration Jacobian. A pre-integrated delta can then be
// corrected post hoc for calibration changes without re-integrating.
//
// The state (p, theta) is a compact chart of SE(2): residual arithmetic is
// plain vector differences on (p, theta) with angle wrapping, never the
// SE(2) minus. The covariance and calibration-Jacobian recursions live in
// the same chart.

#include <cstdint>
#include <vector>

#include "liekit/factor_graph.hpp"
#include "liekit/se2.hpp"

namespace liekit {

struct WheelParams {
  double r_l = 0.1;  // left wheel radius (m)
  double r_r = 0.1;  // right wheel radius (m)
  double d = 0.4;    // axle length (m)
};

/// Correction factors over the nominal wheel geometry, all near 1.
using Calib = Vec3;  // (c_l, c_r, c_d)

struct EncoderTick {
  double dpsi_l = 0.0;  // incremental wheel angle (rad) over dt
  double dpsi_r = 0.0;
};

struct DdNoiseParams {
  double k_l = 0.0;  // variance per radian of wheel motion
  double k_r = 0.0;
  double mu_l = 0.0;  // encoder resolution (rad)
  double mu_r = 0.0;
  Mat2 q_s = Mat2::Zero();  // slippage covariance, in body-magnitude space
};

struct BodyMag {
  double dl = 0.0;      // arc length (m)
  double dtheta = 0.0;  // heading change (rad)
};

/// Pre-integrated motion over a tick span: the accumulated delta, its
/// covariance and the Jacobian with respect to the calibration vector the
/// integration was run at.
struct PreintDelta {
  Pose2 delta;
  Mat3 cov = Mat3::Zero();
  Mat3 jc = Mat3::Zero();
  int ticks = 0;
};

inline constexpr double kDdThetaTol = 1e-6;  // straight-line branch threshold (rad)

/// Body magnitudes: dl = (r_r c_r dpsi_r + r_l c_l dpsi_l)/2 and
/// dtheta = (r_r c_r dpsi_r - r_l c_l dpsi_l)/D with D = d c_d.
BodyMag body_magnitudes(const EncoderTick& y, const Calib& c, const WheelParams& p);

/// d(body)/d(ticks), 2x2 (equals the noise Jacobian d(body)/dn).
Mat2 jac_body_wrt_ticks(const Calib& c, const WheelParams& p);
/// d(body)/d(calibration), 2x3.
Mat2x3 jac_body_wrt_calib(const EncoderTick& y, const Calib& c, const WheelParams& p);

/// One-tick SE(2) delta: an exact arc of radius dl/dtheta, or the midpoint
/// approximation when |dtheta| < theta_tol.
Pose2 delta_from_body(const BodyMag& b, double theta_tol = kDdThetaTol);

/// d(delta)/d(body), 3x2, matching the branch delta_from_body takes.
Mat3x2 jac_delta_wrt_body(const BodyMag& b, double theta_tol = kDdThetaTol);

/// Delta composition (plain SE(2) composition in (p, theta) coordinates).
Pose2 delta_compose(const Pose2& acc, const Pose2& step);
/// d(composed)/d(accumulated), 3x3: [[I, dR [1]x dp_step], [0, 1]].
Mat3 jac_compose_wrt_acc(const Pose2& acc, const Pose2& step);
/// d(composed)/d(step), 3x3: blockdiag(dR, 1).
Mat3 jac_compose_wrt_step(const Pose2& acc);

/// Diagonal encoder noise: sigma^2 = k |dpsi| plus the resolution offset
/// alpha = (mu_l + mu_r)/2 on each wheel.
Mat2 encoder_noise_cov(const EncoderTick& y, const DdNoiseParams& np);

/// Folds a tick sequence into a pre-integrated delta, propagating the
/// covariance and the calibration Jacobian through the composition.
PreintDelta preintegrate(const std::vector<EncoderTick>& ticks, const Calib& c,
                         const WheelParams& p, const DdNoiseParams& np,
                         double theta_tol = kDdThetaTol);

/// Residual of a pre-integrated delta between two poses, with the delta
/// first corrected to the calibration estimate: Omega^{T/2} applied outside.
Vec3 preint_residual_error(const Pose2& xi, const Pose2& xj, const Calib& c,
                           const PreintDelta& delta, const Calib& c_ref);

struct DdCalibOptions {
  int max_outer_iters = 15;
  double calib_tol = 1e-10;   // outer loop: calibration change
  double anchor_info = 1e10;  // information weight of pose anchors
  SolveOptions solve;
};

struct DdCalibResult {
  Calib calib = Calib::Ones();
  Mat3 calib_cov = Mat3::Zero();  // from the information matrix at the solution
  int outer_iterations = 0;
  bool converged = false;
};

/// Joint Gauss-Newton estimate of the calibration and the anchor poses from
/// encoder ticks split into segments between consecutive pose anchors.
/// Re-preintegrates at the updated calibration between solves, so the
/// first-order delta correction never has to extrapolate far. Throws
/// RankDeficiencyError when the trajectory does not excite a direction
/// (straight-line data leaves c_d unobservable).
DdCalibResult calibrate_diffdrive(const std::vector<Pose2>& anchors,
                                  const std::vector<std::vector<EncoderTick>>& segments,
                                  const Calib& initial, const WheelParams& p,
                                  const DdNoiseParams& np, const DdCalibOptions& options = {});

}  // namespace liekit
