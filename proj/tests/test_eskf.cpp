#include <catch2/catch_amalgamated.hpp>

#include "liekit/eskf.hpp"
#include "liekit/numdiff.hpp"
#include "liekit/simulate.hpp"
#include "test_utils.hpp"

using namespace liekit;
using liekit::testing::Rng;

TEST_CASE("zero control and zero noise leave the state unchanged") {
  Rng rng(111);
  const Pose2 start = rng.pose2();
  const Mat3 p0 = 0.01 * Mat3::Identity();
  Eskf<Pose2> filter(start, p0);
  filter.predict(Vec3::Zero(), Mat3::Zero());
  REQUIRE(rminus(filter.mean(), start).norm() == 0.0);
  REQUIRE((filter.cov() - p0).norm() < 1e-15);

  Eskf<Pose2> certain(start, Mat3::Zero());
  certain.predict(Vec3(0.1, 0.0, 0.05), Mat3::Zero());
  REQUIRE(certain.cov().norm() < 1e-18);
}

TEST_CASE("prediction jacobians match the numeric oracle") {
  Rng rng(112);
  for (int trial = 0; trial < 20; ++trial) {
    const Pose2 x = rng.pose2();
    const Vec3 u = rng.twist2(1.0);
    const Mat3 f_analytic = jac_rplus_wrt_x<Pose2>(u);
    const Mat3 g_analytic = jac_rplus_wrt_tau<Pose2>(u);
    REQUIRE((f_analytic - Mat3(Pose2::Exp(u).adjoint().inverse())).norm() < 1e-12);
    REQUIRE(jac_rel_error(f_analytic,
                          jac_numeric([&u](const Pose2& p) { return rplus(p, u); }, x)) < 1e-6);
    REQUIRE(jac_rel_error(g_analytic,
                          jac_numeric([&x](const Vec3& t) { return rplus(x, t); }, u)) < 1e-6);
  }
}

TEST_CASE("measurement jacobian matches the numeric oracle and its closed form") {
  Rng rng(113);
  for (int trial = 0; trial < 20; ++trial) {
    const Pose2 x = rng.pose2();
    const Vec2 b = rng.uniform_vec<2>(-4.0, 4.0);
    Eskf<Pose2> filter(x, Mat3(0.01 * Mat3::Identity()));
    const auto h = filter.measurement_jacobian(b);
    REQUIRE(jac_rel_error(h, jac_numeric([&b](const Pose2& p) { return p.inverse().act(b); }, x)) <
            1e-6);
    // Closed form: H = -[I  R^T [1]x (b - t)].
    Eigen::Matrix<double, 2, 3> expected;
    expected.leftCols<2>() = -Mat2::Identity();
    expected.col(2) = -x.rotation().inverse().act(hat1() * (b - x.translation()));
    REQUIRE((h - expected).norm() < 1e-12);
  }

  // b = t with R = I gives H = -[I 0].
  const Pose2 at(Rot2::Identity(), Vec2(1.0, 2.0));
  Eskf<Pose2> filter(at, Mat3(0.01 * Mat3::Identity()));
  const auto h0 = filter.measurement_jacobian(Vec2(1.0, 2.0));
  REQUIRE((h0.leftCols<2>() + Mat2::Identity()).norm() == 0.0);
  REQUIRE(h0.col(2).norm() == 0.0);
}

TEST_CASE("a perfect measurement leaves the mean and shrinks the covariance") {
  Rng rng(114);
  const Pose2 x = rng.pose2();
  Eskf<Pose2> filter(x, Mat3(0.05 * Mat3::Identity()));
  const Vec2 beacon(2.0, 1.0);
  const Vec2 y = x.inverse().act(beacon);
  const double trace_before = filter.cov().trace();
  filter.correct(beacon, y, Mat2(1e-4 * Mat2::Identity()));
  REQUIRE(rminus(filter.mean(), x).norm() < 1e-12);
  REQUIRE(filter.cov().trace() < trace_before);
}

TEST_CASE("noiseless run drives the error to zero") {
  SimConfig config = SimConfig::default_2d();
  config.noise = false;
  config.steps = 100;
  const auto data = simulate_dataset<Pose2>(config, 1);

  // Start slightly off the truth; corrections must contract the error.
  Eskf<Pose2> filter(rplus(data.truth[0], Vec3(0.2, -0.1, 0.1)), Mat3(0.1 * Mat3::Identity()));
  const double initial_error = rminus(data.truth[0], filter.mean()).norm();
  for (int k = 0; k < config.steps; ++k) {
    filter.predict(data.controls[k], data.process_cov);
    for (const auto& [id, y] : data.measurements[k + 1])
      filter.correct(data.beacons[id], y, data.meas_cov);
  }
  const double final_error = rminus(data.truth.back(), filter.mean()).norm();
  REQUIRE(final_error < 1e-9);
  REQUIRE(final_error < initial_error);
}

TEST_CASE("covariance stays symmetric and positive semi-definite over 1000 cycles") {
  SimConfig config = SimConfig::default_2d();
  config.steps = 1000;
  const auto data = simulate_dataset<Pose2>(config, 2);

  Eskf<Pose2> filter(data.truth[0], Mat3(0.01 * Mat3::Identity()));
  for (int k = 0; k < config.steps; ++k) {
    filter.predict(data.controls[k], data.process_cov);
    for (const auto& [id, y] : data.measurements[k + 1])
      filter.correct(data.beacons[id], y, data.meas_cov);
    const Mat3& p = filter.cov();
    REQUIRE((p - p.transpose()).norm() < 1e-12);
    Eigen::SelfAdjointEigenSolver<Mat3> eig(p);
    REQUIRE(eig.eigenvalues().minCoeff() > -1e-9);
  }
}

TEST_CASE("invalid inputs are rejected") {
  Rng rng(115);
  Eskf<Pose2> filter(rng.pose2(), Mat3(0.01 * Mat3::Identity()));
  Mat3 bad = Mat3::Identity();
  bad(0, 0) = -1.0;
  REQUIRE_THROWS_AS(filter.predict(Vec3::Zero(), bad), std::invalid_argument);

  Eskf<Pose2> degenerate(rng.pose2(), Mat3(Mat3::Zero()));
  REQUIRE_THROWS_AS(degenerate.correct(Vec2(1, 0), Vec2(1, 0), Mat2(Mat2::Zero())),
                    std::runtime_error);
}

TEST_CASE("the same filter code runs on SE(3)") {
  SimConfig config = SimConfig::default_3d();
  config.noise = false;
  config.steps = 80;
  const auto data = simulate_dataset<Pose3>(config, 3);

  Vec6 offset;
  offset << 0.2, -0.1, 0.1, 0.05, -0.02, 0.08;
  Eskf<Pose3> filter(rplus(data.truth[0], offset), Mat6(0.1 * Mat6::Identity()));
  for (int k = 0; k < config.steps; ++k) {
    filter.predict(data.controls[k], data.process_cov);
    for (const auto& [id, y] : data.measurements[k + 1])
      filter.correct(data.beacons[id], y, data.meas_cov);
  }
  REQUIRE(rminus(data.truth.back(), filter.mean()).norm() < 1e-9);

  // And its measurement jacobian also passes the oracle.
  const Vec3 b(1.0, -2.0, 0.5);
  REQUIRE(jac_rel_error(
              filter.measurement_jacobian(b),
              jac_numeric([&b](const Pose3& p) { return p.inverse().act(b); }, filter.mean())) < 1e-6);
}

TEST_CASE("nees of the true state is chi-square sized on average") {
  SimConfig config = SimConfig::default_2d();
  config.steps = 150;
  double nees_sum = 0.0;
  int count = 0;
  for (uint64_t seed = 0; seed < 10; ++seed) {
    const auto data = simulate_dataset<Pose2>(config, seed);
    Eskf<Pose2> filter(data.truth[0], Mat3(1e-10 * Mat3::Identity()));
    for (int k = 0; k < config.steps; ++k) {
      filter.predict(data.controls[k], data.process_cov);
      for (const auto& [id, y] : data.measurements[k + 1])
        filter.correct(data.beacons[id], y, data.meas_cov);
      nees_sum += filter.nees(data.truth[k + 1]);
      ++count;
    }
  }
  const double mean_nees = nees_sum / count;
  REQUIRE(mean_nees > 1.5);
  REQUIRE(mean_nees < 6.0);
}
