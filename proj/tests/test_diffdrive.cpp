#include <catch2/catch_amalgamated.hpp>

#include "liekit/diffdrive.hpp"
#include "liekit/numdiff.hpp"
#include "liekit/simulate.hpp"
#include "test_utils.hpp"

using namespace liekit;
using liekit::testing::Rng;

namespace {

const WheelParams kWheel{0.1, 0.1, 0.5};

EncoderTick tick(double l, double r) { return EncoderTick{l, r}; }

Vec3 pose_chart(const Pose2& p) {
  return Vec3(p.translation().x(), p.translation().y(), p.angle());
}

}  // namespace

TEST_CASE("body magnitudes") {
  // Symmetric drive: the differential term cancels.
  const BodyMag sym = body_magnitudes(tick(0.7, 0.7), Calib::Ones(), kWheel);
  REQUIRE(std::abs(sym.dl - 0.1 * 0.7) < 1e-15);
  REQUIRE(sym.dtheta == 0.0);

  // Pure turn: the common term cancels.
  const BodyMag turn = body_magnitudes(tick(-0.7, 0.7), Calib::Ones(), kWheel);
  REQUIRE(turn.dl == 0.0);
  REQUIRE(std::abs(turn.dtheta - 2.0 * 0.1 * 0.7 / 0.5) < 1e-15);

  // Direct evaluation, cross-checked by hand:
  //   dl = (0.1*1.2 + 0.1*1.0)/2 = 0.11, dtheta = (0.1*1.2 - 0.1*1.0)/0.5 = 0.04.
  const BodyMag b = body_magnitudes(tick(1.0, 1.2), Calib::Ones(), kWheel);
  REQUIRE(std::abs(b.dl - 0.11) < 1e-15);
  REQUIRE(std::abs(b.dtheta - 0.04) < 1e-15);

  REQUIRE_THROWS_AS(body_magnitudes(tick(1, 1), Calib(1.0, -1.0, 1.0), kWheel),
                    std::invalid_argument);
}

TEST_CASE("body jacobians match the numeric oracle") {
  Rng rng(131);
  for (int trial = 0; trial < 100; ++trial) {
    const Calib c(rng.uniform(0.9, 1.1), rng.uniform(0.9, 1.1), rng.uniform(0.9, 1.1));
    const EncoderTick y = tick(rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5));

    const MatX num_ticks = jac_numeric(
        [&c](const Vec2& psi) {
          const BodyMag b = body_magnitudes(tick(psi(0), psi(1)), c, kWheel);
          return Vec2(b.dl, b.dtheta);
        },
        Vec2(y.dpsi_l, y.dpsi_r));
    REQUIRE(jac_rel_error(jac_body_wrt_ticks(c, kWheel), num_ticks) < 1e-6);

    const MatX num_calib = jac_numeric(
        [&y](const Vec3& cc) {
          const BodyMag b = body_magnitudes(y, cc, kWheel);
          return Vec2(b.dl, b.dtheta);
        },
        Vec3(c));
    const Mat2x3 analytic = jac_body_wrt_calib(y, c, kWheel);
    REQUIRE(jac_rel_error(analytic, num_calib) < 1e-6);

    // Third column: (0, -dtheta/c_d).
    const BodyMag b = body_magnitudes(y, c, kWheel);
    REQUIRE(analytic(0, 2) == 0.0);
    REQUIRE(std::abs(analytic(1, 2) + b.dtheta / c(2)) < 1e-12);
  }
}

TEST_CASE("delta from body magnitudes") {
  // Straight line through the fallback branch.
  const Pose2 straight = delta_from_body(BodyMag{0.8, 0.0});
  REQUIRE((pose_chart(straight) - Vec3(0.8, 0.0, 0.0)).norm() == 0.0);

  // Quarter circle of radius 1.
  const Pose2 arc = delta_from_body(BodyMag{kPi / 2.0, kPi / 2.0});
  REQUIRE((pose_chart(arc) - Vec3(1.0, 1.0, kPi / 2.0)).norm() < 1e-12);

  // The two branches agree to O(dtheta^3) at the threshold.
  for (const double sign : {1.0, -1.0}) {
    const BodyMag b{0.9, sign * kDdThetaTol};
    const Pose2 from_arc = delta_from_body(b, kDdThetaTol / 2.0);   // forces the arc branch
    const Pose2 from_mid = delta_from_body(b, 2.0 * kDdThetaTol);   // forces the fallback
    REQUIRE((pose_chart(from_arc) - pose_chart(from_mid)).norm() < 1e-12);
  }
}

TEST_CASE("delta jacobians per branch") {
  // Fallback at b = (1, 0).
  Mat3x2 expect;
  expect << 1.0, 0.0, 0.0, 0.5, 0.0, 1.0;
  REQUIRE((jac_delta_wrt_body(BodyMag{1.0, 0.0}) - expect).norm() == 0.0);

  // Arc branch at dl = dtheta = pi/2 against the printed closed form.
  const double t = kPi / 2.0;
  const double radius = 1.0;
  const Mat3x2 arc = jac_delta_wrt_body(BodyMag{t, t});
  REQUIRE(std::abs(arc(0, 0) - std::sin(t) / t) < 1e-15);
  REQUIRE(std::abs(arc(0, 1) - radius * (std::cos(t) - std::sin(t) / t)) < 1e-15);
  REQUIRE(std::abs(arc(1, 0) - (1.0 - std::cos(t)) / t) < 1e-15);
  REQUIRE(std::abs(arc(1, 1) - radius * (std::sin(t) - (1.0 - std::cos(t)) / t)) < 1e-15);

  Rng rng(132);
  for (int trial = 0; trial < 100; ++trial) {
    const bool straightish = trial % 2 == 0;
    const BodyMag b{rng.uniform(-1.0, 1.0),
                    straightish ? rng.uniform(-5e-7, 5e-7) : rng.uniform(0.1, 2.0)};
    const MatX numeric = jac_numeric(
        [](const Vec2& v) { return pose_chart(delta_from_body(BodyMag{v(0), v(1)})); },
        Vec2(b.dl, b.dtheta), 1e-8);
    REQUIRE(jac_rel_error(jac_delta_wrt_body(b), numeric, 1e-6) < 1e-5);
  }
}

TEST_CASE("branch continuity of the jacobian at the threshold") {
  // At the threshold the two branch formulas differ by O(dl * dtheta), so
  // probe with a small tick.
  const double dl = 1e-3;
  for (const double sign : {1.0, -1.0}) {
    const BodyMag b{dl, sign * kDdThetaTol};
    const Mat3x2 arc = jac_delta_wrt_body(b, kDdThetaTol / 2.0);
    const Mat3x2 mid = jac_delta_wrt_body(b, 2.0 * kDdThetaTol);
    REQUIRE((arc - mid).cwiseAbs().maxCoeff() < 1e-10);
    REQUIRE((pose_chart(delta_from_body(b, kDdThetaTol / 2.0)) -
             pose_chart(delta_from_body(b, 2.0 * kDdThetaTol)))
                .norm() < 1e-12);
  }
}

TEST_CASE("delta composition and its jacobians") {
  Rng rng(133);
  const Pose2 step = delta_from_body(BodyMag{0.3, 0.2});
  REQUIRE(rminus(delta_compose(Pose2(), step), step).norm() == 0.0);

  for (int trial = 0; trial < 100; ++trial) {
    const Pose2 acc(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2));
    const Pose2 inc(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5));

    // Matches the se2 group composition.
    REQUIRE(rminus(delta_compose(acc, inc), acc * inc).norm() < 1e-12);

    const MatX num_acc = jac_numeric(
        [&inc](const Vec3& a) {
          return pose_chart(delta_compose(Pose2(a(0), a(1), a(2)), inc));
        },
        pose_chart(acc));
    REQUIRE(jac_rel_error(jac_compose_wrt_acc(acc, inc), num_acc) < 1e-6);

    const MatX num_step = jac_numeric(
        [&acc](const Vec3& s) {
          return pose_chart(delta_compose(acc, Pose2(s(0), s(1), s(2))));
        },
        pose_chart(inc));
    REQUIRE(jac_rel_error(jac_compose_wrt_step(acc), num_step) < 1e-6);
  }
}

TEST_CASE("encoder noise covariance") {
  REQUIRE(encoder_noise_cov(tick(1.0, -0.5), DdNoiseParams{}).norm() == 0.0);

  DdNoiseParams np;
  np.mu_l = np.mu_r = 2e-3;
  const Mat2 rest = encoder_noise_cov(tick(0.0, 0.0), np);
  REQUIRE(std::abs(rest(0, 0) - 4e-6) < 1e-18);
  REQUIRE(std::abs(rest(1, 1) - 4e-6) < 1e-18);

  np = DdNoiseParams{};
  np.k_l = 1e-4;
  np.mu_l = np.mu_r = 1e-3;
  const Mat2 q = encoder_noise_cov(tick(0.5, 0.0), np);
  REQUIRE(std::abs(q(0, 0) - 5.1e-5) < 1e-15);

  // Reverse motion still yields non-negative variance.
  np.k_l = 1e-4;
  const Mat2 rev = encoder_noise_cov(tick(-0.5, 0.0), np);
  REQUIRE(rev(0, 0) == q(0, 0));
}

TEST_CASE("preintegration of an all-zero tick sequence") {
  const std::vector<EncoderTick> ticks(10, EncoderTick{0.0, 0.0});
  const PreintDelta pre = preintegrate(ticks, Calib::Ones(), kWheel, DdNoiseParams{});
  REQUIRE(pose_chart(pre.delta).norm() == 0.0);
  REQUIRE(pre.cov.norm() == 0.0);
  REQUIRE(pre.jc.norm() == 0.0);
  REQUIRE(pre.ticks == 10);

  REQUIRE_THROWS_AS(preintegrate({}, Calib::Ones(), kWheel, DdNoiseParams{}),
                    std::invalid_argument);
}

TEST_CASE("one tick reproduces the direct delta, and the fold is path-consistent") {
  const std::vector<EncoderTick> one{tick(0.8, 0.8)};
  const PreintDelta pre = preintegrate(one, Calib::Ones(), kWheel, DdNoiseParams{});
  const Pose2 direct = delta_from_body(body_magnitudes(one[0], Calib::Ones(), kWheel));
  REQUIRE(rminus(pre.delta, direct).norm() == 0.0);

  // The accumulated delta equals the plain left-to-right composition.
  DdSimConfig config;
  config.wheel = kWheel;
  config.ticks = 120;
  const DdDataset data = simulate_diffdrive(config, 21);
  const PreintDelta folded = preintegrate(data.ticks, Calib::Ones(), kWheel, DdNoiseParams{});
  Pose2 composed;
  for (const auto& t : data.ticks)
    composed = delta_compose(composed, delta_from_body(body_magnitudes(t, Calib::Ones(), kWheel)));
  REQUIRE((pose_chart(folded.delta) - pose_chart(composed)).norm() < 1e-12);
  REQUIRE((pose_chart(composed) - pose_chart(data.truth.back())).norm() < 1e-12);
}

TEST_CASE("covariance recursion stays symmetric PSD and det-monotone") {
  DdSimConfig config;
  config.wheel = kWheel;
  config.ticks = 200;
  config.noise.k_l = config.noise.k_r = 1e-4;
  config.noise.mu_l = config.noise.mu_r = 1e-3;
  config.noise.q_s = 1e-8 * Mat2::Identity();
  const DdDataset data = simulate_diffdrive(config, 22);

  PreintDelta acc;
  double last_det = 0.0;
  for (size_t k = 0; k < data.ticks.size(); ++k) {
    const std::vector<EncoderTick> upto(data.ticks.begin(), data.ticks.begin() + k + 1);
    const PreintDelta pre = preintegrate(upto, Calib::Ones(), kWheel, config.noise);
    REQUIRE((pre.cov - pre.cov.transpose()).norm() < 1e-15);
    Eigen::SelfAdjointEigenSolver<Mat3> eig(pre.cov);
    REQUIRE(eig.eigenvalues().minCoeff() > -1e-15);
    const double det = pre.cov.determinant();
    REQUIRE(det >= last_det - 1e-30);
    last_det = det;
  }
}

TEST_CASE("the calibration jacobian recursion matches finite differences") {
  DdSimConfig config;
  config.wheel = kWheel;
  config.ticks = 60;
  const DdDataset data = simulate_diffdrive(config, 23);
  const Calib c0(1.01, 0.99, 1.02);

  const PreintDelta pre = preintegrate(data.ticks, c0, kWheel, DdNoiseParams{});
  const double eps = 1e-5;
  MatX numeric(3, 3);
  for (int i = 0; i < 3; ++i) {
    Calib cp = c0, cm = c0;
    cp(i) += eps;
    cm(i) -= eps;
    const Vec3 dp = pose_chart(preintegrate(data.ticks, cp, kWheel, DdNoiseParams{}).delta);
    const Vec3 dm = pose_chart(preintegrate(data.ticks, cm, kWheel, DdNoiseParams{}).delta);
    Vec3 diff = dp - dm;
    diff(2) = wrap_to_pi(diff(2));
    numeric.col(i) = diff / (2.0 * eps);
  }
  REQUIRE(jac_rel_error(pre.jc, numeric, 1e-6) < 1e-6);
}

TEST_CASE("preintegrated residual") {
  DdSimConfig config;
  config.wheel = kWheel;
  config.ticks = 50;
  const DdDataset data = simulate_diffdrive(config, 24);
  const PreintDelta pre = preintegrate(data.ticks, Calib::Ones(), kWheel, DdNoiseParams{});

  // Exact consistency: x_j = x_i * delta gives a zero error.
  const Pose2 xi(0.4, -0.2, 0.3);
  const Pose2 xj = xi * pre.delta;
  REQUIRE(preint_residual_error(xi, xj, Calib::Ones(), pre, Calib::Ones()).norm() < 1e-12);

  // Angle differences wrap into (-pi, pi] even when the raw heading
  // difference crosses the branch cut.
  PreintDelta small = pre;
  small.delta = Pose2(0.0, 0.0, 0.3);
  small.jc.setZero();
  const Pose2 xa(0.0, 0.0, 3.0);                // near +pi
  const Pose2 xb(0.0, 0.0, 3.0 + 0.3 + 0.1);    // wraps past the cut
  const Vec3 err = preint_residual_error(xa, xb, Calib::Ones(), small, Calib::Ones());
  REQUIRE(std::abs(err(2) - 0.1) < 1e-12);
}

TEST_CASE("noiseless calibration recovers the identity and an injected correction") {
  DdSimConfig config;
  config.wheel = kWheel;
  config.ticks = 500;
  config.anchor_stride = 50;

  {
    const DdDataset data = simulate_diffdrive(config, 25);
    const DdCalibResult res = calibrate_diffdrive(data.anchors, data.segments, Calib::Ones(),
                                                  kWheel, DdNoiseParams{});
    REQUIRE(res.converged);
    REQUIRE((res.calib - Calib::Ones()).norm() < 1e-8);
  }

  {
    config.calib_true = Calib(1.02, 0.98, 1.05);
    const DdDataset data = simulate_diffdrive(config, 26);
    // Start from the nominal geometry and let the solver find the truth.
    const DdCalibResult res = calibrate_diffdrive(data.anchors, data.segments, Calib::Ones(),
                                                  kWheel, DdNoiseParams{});
    REQUIRE(res.converged);
    REQUIRE((res.calib - config.calib_true).norm() < 1e-6);
  }
}

TEST_CASE("straight-line data leaves the axle correction unobservable") {
  DdSimConfig config;
  config.wheel = kWheel;
  config.ticks = 300;
  config.anchor_stride = 50;
  config.pattern = DdPattern::kStraight;
  const DdDataset data = simulate_diffdrive(config, 27);

  bool caught = false;
  try {
    calibrate_diffdrive(data.anchors, data.segments, Calib::Ones(), kWheel, DdNoiseParams{});
  } catch (const RankDeficiencyError& e) {
    caught = true;
    REQUIRE(e.deficiency() == 1);
  }
  REQUIRE(caught);
}

TEST_CASE("anchor and segment layout validation") {
  DdSimConfig config;
  config.wheel = kWheel;
  config.ticks = 100;
  const DdDataset data = simulate_diffdrive(config, 28);
  REQUIRE(data.segments.size() + 1 == data.anchors.size());

  std::vector<Pose2> one_anchor{data.anchors.front()};
  REQUIRE_THROWS_AS(
      calibrate_diffdrive(one_anchor, data.segments, Calib::Ones(), kWheel, DdNoiseParams{}),
      std::invalid_argument);
}
