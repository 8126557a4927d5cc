#include <catch2/catch_amalgamated.hpp>

#include "liekit/numdiff.hpp"
#include "liekit/se2.hpp"
#include "liekit/uncertainty.hpp"
#include "test_utils.hpp"

using namespace liekit;
using liekit::testing::Rng;

namespace {

Mat3 random_spd(Rng& rng, double scale) {
  Mat3 a;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) a(r, c) = rng.normal();
  return scale * (a * a.transpose() + 0.5 * Mat3::Identity());
}

}  // namespace

TEST_CASE("propagate with the identity jacobian leaves the state unchanged") {
  Rng rng(101);
  const Pose2 mean = rng.pose2();
  const Mat3 cov = random_spd(rng, 0.01);
  const GaussianState<Pose2> state(mean, cov);
  const auto out = propagate<Pose2>(state, [](const Pose2& x) { return x; }, Mat3(Mat3::Identity()));
  REQUIRE((out.cov() - cov).norm() < 1e-12);
  REQUIRE(rminus(out.mean(), mean).norm() == 0.0);

  const auto zeroed = propagate<Pose2>(state, [](const Pose2& x) { return x; }, Mat3(Mat3::Zero()));
  REQUIRE(zeroed.cov().norm() == 0.0);
}

TEST_CASE("monte-carlo covariance propagation matches J Sigma J^T") {
  Rng rng(102);
  const Pose2 mean = rng.pose2();
  const Mat3 cov = random_spd(rng, 1e-4);
  const GaussianState<Pose2> state(mean, cov);

  const Pose2 rhs = rng.pose2();
  const auto f = [&rhs](const Pose2& x) { return x.inverse() * rhs; };
  const Mat3 jac = jac_numeric(f, mean);
  const auto out = propagate<Pose2>(state, f, jac);

  const int kSamples = 100000;
  Mat3 sample_cov = Mat3::Zero();
  for (int i = 0; i < kSamples; ++i) {
    const Vec3 err = rminus(f(state.sample(rng.engine())), out.mean());
    sample_cov += err * err.transpose();
  }
  sample_cov /= static_cast<double>(kSamples);
  REQUIRE((sample_cov - out.cov()).norm() / out.cov().norm() < 0.05);
}

TEST_CASE("local and global covariances transform through the adjoint") {
  Rng rng(103);
  const Mat3 cov = random_spd(rng, 0.01);
  REQUIRE((local_to_global_cov(Pose2::Identity(), cov) - cov).norm() == 0.0);

  for (int trial = 0; trial < 50; ++trial) {
    const Pose2 x = rng.pose2();
    const Mat3 roundtrip = global_to_local_cov(x, local_to_global_cov(x, cov));
    REQUIRE((roundtrip - cov).norm() < 1e-10);
  }
}

TEST_CASE("sampled perturbations satisfy the adjoint frame relation") {
  Rng rng(104);
  const Pose2 mean = rng.pose2();
  const GaussianState<Pose2> state(mean, random_spd(rng, 0.01));
  for (int i = 0; i < 200; ++i) {
    const Pose2 x = state.sample(rng.engine());
    REQUIRE((lminus(x, mean) - mean.adjoint() * rminus(x, mean)).norm() < 1e-9);
  }
}

TEST_CASE("global-frame sampling matches the transformed covariance") {
  Rng rng(105);
  const Pose2 mean = rng.pose2();
  const Mat3 cov_local = random_spd(rng, 1e-4);
  const Mat3 cov_global = local_to_global_cov(mean, cov_local);
  const GaussianState<Pose2> global_state(mean, cov_global, Frame::Global);

  const int kSamples = 100000;
  Mat3 sample_cov = Mat3::Zero();
  for (int i = 0; i < kSamples; ++i) {
    const Vec3 err = lminus(global_state.sample(rng.engine()), mean);
    sample_cov += err * err.transpose();
  }
  sample_cov /= static_cast<double>(kSamples);
  REQUIRE((sample_cov - cov_global).norm() / cov_global.norm() < 0.05);
}

TEST_CASE("sampling is deterministic under a fixed seed and exact for zero covariance") {
  Rng rng(106);
  const Pose2 mean = rng.pose2();
  const GaussianState<Pose2> state(mean, Mat3(Mat3::Zero()));
  std::mt19937_64 g1(42);
  REQUIRE(rminus(state.sample(g1), mean).norm() < 1e-5);  // only the 1e-12 jitter

  const GaussianState<Pose2> wide(mean, random_spd(rng, 0.1));
  std::mt19937_64 g2(7), g3(7);
  REQUIRE(rminus(wide.sample(g2), wide.sample(g3)).norm() == 0.0);
}

TEST_CASE("covariance validation and repair") {
  Rng rng(107);
  const Pose2 mean = rng.pose2();

  Mat3 asym = random_spd(rng, 0.01);
  asym(0, 1) += 1e-3;
  REQUIRE_THROWS_AS(GaussianState<Pose2>(mean, asym), std::invalid_argument);

  Mat3 indefinite = Mat3::Identity();
  indefinite(2, 2) = -0.5;
  REQUIRE_THROWS_AS(GaussianState<Pose2>(mean, indefinite), std::invalid_argument);

  // A tiny negative eigenvalue is clamped to zero.
  Mat3 nearly = Mat3::Identity();
  nearly(2, 2) = -1e-10;
  const GaussianState<Pose2> repaired(mean, nearly);
  Eigen::SelfAdjointEigenSolver<Mat3> eig(repaired.cov());
  REQUIRE(eig.eigenvalues().minCoeff() >= 0.0);
}
