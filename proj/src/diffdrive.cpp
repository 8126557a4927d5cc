#include "liekit/diffdrive.hpp"

#include <cmath>
#include <stdexcept>

#include "liekit/angle.hpp"

namespace liekit {

namespace {

void check_params(const Calib& c, const WheelParams& p) {
  if (!(p.r_l > 0.0 && p.r_r > 0.0 && p.d > 0.0))
    throw std::invalid_argument("wheel parameters must be positive");
  if (!(c(0) > 0.0 && c(1) > 0.0 && c(2) > 0.0))
    throw std::invalid_argument("calibration factors must be positive");
}

}  // namespace

BodyMag body_magnitudes(const EncoderTick& y, const Calib& c, const WheelParams& p) {
  check_params(c, p);
  const double left = p.r_l * c(0) * y.dpsi_l;
  const double right = p.r_r * c(1) * y.dpsi_r;
  const double big_d = p.d * c(2);
  return BodyMag{0.5 * (right + left), (right - left) / big_d};
}

Mat2 jac_body_wrt_ticks(const Calib& c, const WheelParams& p) {
  check_params(c, p);
  const double big_d = p.d * c(2);
  Mat2 j;
  j << 0.5 * p.r_l * c(0), 0.5 * p.r_r * c(1),  //
      -p.r_l * c(0) / big_d, p.r_r * c(1) / big_d;
  return j;
}

Mat2x3 jac_body_wrt_calib(const EncoderTick& y, const Calib& c, const WheelParams& p) {
  check_params(c, p);
  const double big_d = p.d * c(2);
  const double dtheta = (p.r_r * c(1) * y.dpsi_r - p.r_l * c(0) * y.dpsi_l) / big_d;
  Mat2x3 j;
  j << 0.5 * p.r_l * y.dpsi_l, 0.5 * p.r_r * y.dpsi_r, 0.0,  //
      -p.r_l * y.dpsi_l / big_d, p.r_r * y.dpsi_r / big_d, -dtheta / c(2);
  return j;
}

namespace {

// (1 - cos t) evaluated as 2 sin^2(t/2); the naive form cancels near the
// straight-line threshold.
double one_minus_cos(double t) {
  const double s = std::sin(0.5 * t);
  return 2.0 * s * s;
}

}  // namespace

Pose2 delta_from_body(const BodyMag& b, double theta_tol) {
  if (!(theta_tol > 0.0)) throw std::invalid_argument("theta_tol must be positive");
  if (std::abs(b.dtheta) >= theta_tol) {
    const double radius = b.dl / b.dtheta;
    return Pose2(radius * std::sin(b.dtheta), radius * one_minus_cos(b.dtheta), b.dtheta);
  }
  return Pose2(b.dl * std::cos(0.5 * b.dtheta), b.dl * std::sin(0.5 * b.dtheta), b.dtheta);
}

Mat3x2 jac_delta_wrt_body(const BodyMag& b, double theta_tol) {
  Mat3x2 j;
  if (std::abs(b.dtheta) >= theta_tol) {
    const double t = b.dtheta;
    const double sin_over = std::sin(t) / t;
    const double one_minus_cos_over = one_minus_cos(t) / t;
    // The dtheta column entries R(cos - sin/t) and R(sin - (1-cos)/t) are
    // grouped so the subtractions happen between same-scale terms.
    j << sin_over, b.dl * (t * std::cos(t) - std::sin(t)) / (t * t),            //
        one_minus_cos_over, b.dl * (t * std::sin(t) - one_minus_cos(t)) / (t * t),  //
        0.0, 1.0;
  } else {
    const double h = 0.5 * b.dtheta;
    j << std::cos(h), -0.5 * b.dl * std::sin(h),  //
        std::sin(h), 0.5 * b.dl * std::cos(h),    //
        0.0, 1.0;
  }
  return j;
}

Pose2 delta_compose(const Pose2& acc, const Pose2& step) { return acc * step; }

Mat3 jac_compose_wrt_acc(const Pose2& acc, const Pose2& step) {
  Mat3 j = Mat3::Identity();
  j.topRightCorner<2, 1>() = acc.rotation().act(hat1() * step.translation());
  return j;
}

Mat3 jac_compose_wrt_step(const Pose2& acc) {
  Mat3 j = Mat3::Identity();
  j.topLeftCorner<2, 2>() = acc.rotation().matrix();
  return j;
}

Mat2 encoder_noise_cov(const EncoderTick& y, const DdNoiseParams& np) {
  if (np.k_l < 0.0 || np.k_r < 0.0 || np.mu_l < 0.0 || np.mu_r < 0.0)
    throw std::invalid_argument("noise parameters must be non-negative");
  const double alpha = 0.5 * (np.mu_l + np.mu_r);
  Mat2 q = Mat2::Zero();
  q(0, 0) = np.k_l * std::abs(y.dpsi_l) + alpha * alpha;
  q(1, 1) = np.k_r * std::abs(y.dpsi_r) + alpha * alpha;
  return q;
}

PreintDelta preintegrate(const std::vector<EncoderTick>& ticks, const Calib& c,
                         const WheelParams& p, const DdNoiseParams& np, double theta_tol) {
  if (ticks.empty()) throw std::invalid_argument("preintegrate: empty tick sequence");

  PreintDelta out;
  const Mat2 j_body_ticks = jac_body_wrt_ticks(c, p);
  for (const EncoderTick& tick : ticks) {
    const BodyMag b = body_magnitudes(tick, c, p);
    const Pose2 step = delta_from_body(b, theta_tol);
    const Mat3x2 j_delta_body = jac_delta_wrt_body(b, theta_tol);

    // Per-tick delta covariance: encoder noise mapped through the body
    // magnitudes, plus slippage injected in body-magnitude space.
    const Mat2 q_body =
        j_body_ticks * encoder_noise_cov(tick, np) * j_body_ticks.transpose() + np.q_s;
    const Mat3 q_step = j_delta_body * q_body * j_delta_body.transpose();

    const Mat3 j_acc = jac_compose_wrt_acc(out.delta, step);
    const Mat3 j_step = jac_compose_wrt_step(out.delta);
    out.cov = j_acc * out.cov * j_acc.transpose() + j_step * q_step * j_step.transpose();
    out.cov = 0.5 * (out.cov + out.cov.transpose()).eval();
    out.jc = j_acc * out.jc + j_step * j_delta_body * jac_body_wrt_calib(tick, c, p);
    out.delta = delta_compose(out.delta, step);
    ++out.ticks;
  }
  return out;
}

Vec3 preint_residual_error(const Pose2& xi, const Pose2& xj, const Calib& c,
                           const PreintDelta& delta, const Calib& c_ref) {
  Vec3 predicted;
  predicted.head<2>() = xi.rotation().inverse().act(xj.translation() - xi.translation());
  predicted(2) = wrap_to_pi(xj.angle() - xi.angle());

  const Vec3 correction = delta.jc * (c - c_ref);
  Vec3 corrected;
  corrected.head<2>() = delta.delta.translation() + correction.head<2>();
  corrected(2) = wrap_to_pi(delta.delta.angle() + correction(2));

  Vec3 err;
  err.head<2>() = predicted.head<2>() - corrected.head<2>();
  err(2) = wrap_to_pi(predicted(2) - corrected(2));
  return err;
}

DdCalibResult calibrate_diffdrive(const std::vector<Pose2>& anchors,
                                  const std::vector<std::vector<EncoderTick>>& segments,
                                  const Calib& initial, const WheelParams& p,
                                  const DdNoiseParams& np, const DdCalibOptions& options) {
  if (anchors.size() < 2) throw std::invalid_argument("calibration needs at least two pose anchors");
  if (segments.size() + 1 != anchors.size())
    throw std::invalid_argument("expected one tick segment between consecutive anchors");

  DdCalibResult result;
  result.calib = initial;

  for (int outer = 0; outer < options.max_outer_iters; ++outer) {
    Composite state;
    const int calib_block = state.add(BlockValue(Vec3(result.calib)));
    std::vector<int> pose_blocks;
    for (const Pose2& anchor : anchors) pose_blocks.push_back(state.add(BlockValue(anchor)));

    FactorGraph graph(std::move(state));
    const MatX anchor_info = options.anchor_info * Mat3::Identity();
    for (size_t i = 0; i < anchors.size(); ++i)
      graph.add_prior(pose_blocks[i], BlockValue(anchors[i]), anchor_info);

    for (size_t k = 0; k < segments.size(); ++k) {
      const PreintDelta pre = preintegrate(segments[k], result.calib, p, np);
      const Mat3 q = pre.cov + 1e-12 * Mat3::Identity();
      graph.add_preint_motion(calib_block, pose_blocks[k], pose_blocks[k + 1], pre.delta, pre.jc,
                              result.calib, MatX(q.inverse()));
    }

    graph.solve(options.solve);  // throws RankDeficiencyError if unobservable
    const Calib updated = graph.state().block_as<Vec3>(calib_block);
    const double change = (updated - result.calib).norm();
    result.calib = updated;
    result.outer_iterations = outer + 1;

    if (change < options.calib_tol) {
      const MatX jac = graph.jacobian();
      const MatX cov = (jac.transpose() * jac).inverse();
      result.calib_cov = cov.block(graph.state().block_offset(calib_block),
                                   graph.state().block_offset(calib_block), 3, 3);
      result.converged = true;
      break;
    }
  }
  return result;
}

}  // namespace liekit
