#pragma once

// Synthetic scenario generation for the estimation pipelines: a robot
// driven by twist controls among point beacons, with additive Gaussian
// noise on controls and on body-frame beacon measurements. Generation is
// deterministic under a fixed seed.

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "liekit/diffdrive.hpp"
#include "liekit/factor_graph.hpp"
#include "liekit/se2.hpp"
#include "liekit/se3.hpp"

namespace liekit {

struct SimConfig {
  int steps = 200;
  double dt = 0.1;
  double v = 1.0;      // longitudinal velocity (m/s)
  double omega = 0.3;  // yaw rate (rad/s)
  double sigma_v = 0.1;
  double sigma_s = 0.05;
  double sigma_w = 0.05;
  double sigma_xy = 0.05;  // beacon measurement noise per axis
  bool noise = true;       // when false, injected noise is zero but the
                           // covariances below are still reported
  std::vector<VecX> beacons;

  /// Default beacon layouts (3 beacons around the trajectory).
  static SimConfig default_2d();
  static SimConfig default_3d();
};

template <class Pose>
struct Dataset {
  using Tangent = typename Pose::Tangent;
  using Point = typename Pose::Point;
  using ProcessCov = Eigen::Matrix<double, Pose::kDof, Pose::kDof>;
  using MeasCov = Eigen::Matrix<double, Point::RowsAtCompileTime, Point::RowsAtCompileTime>;

  std::vector<Pose> truth;        // steps + 1 poses, truth[0] at the origin
  std::vector<Tangent> controls;  // measured controls, one per step
  std::vector<Point> beacons;
  // measurements[i]: (beacon id, body-frame reading) pairs taken at truth[i].
  std::vector<std::vector<std::pair<int, Point>>> measurements;
  ProcessCov process_cov = ProcessCov::Zero();
  MeasCov meas_cov = MeasCov::Zero();
};

template <class Pose>
Dataset<Pose> simulate_dataset(const SimConfig& config, uint64_t seed);

/// Block handles of a SAM problem built from a dataset.
struct SamLayout {
  std::vector<int> poses;
  std::vector<int> beacons;
  int calib = -1;  // bias block when self-calibration is on
};

/// Assembles the smoothing-and-mapping factor graph: a prior on the first
/// pose, motion factors between consecutive poses, and one beacon factor
/// per (pose index, beacon id) pair in `visibility`. The state starts at
/// dead-reckoned values. With `bias` set, a 2-DoF bias block is prepended
/// and the motion factors become calibrated-motion factors.
template <class Pose>
FactorGraph build_sam_graph(const Dataset<Pose>& dataset,
                            const std::vector<std::pair<int, int>>& visibility, SamLayout& layout,
                            bool estimate_bias = false);

/// The paper's 3-pose / 3-beacon visibility pattern.
std::vector<std::pair<int, int>> three_pose_visibility();

/// Applies a constant (v, omega) bias to the measured controls, modelling
/// an uncalibrated motion sensor.
template <class Pose>
void inject_control_bias(Dataset<Pose>& dataset, const Vec2& bias);

// ---------------------------------------------------------------------------
// Differential-drive simulation
// ---------------------------------------------------------------------------

enum class DdPattern { kFigureEight, kStraight };

struct DdSimConfig {
  WheelParams wheel;
  Vec3 calib_true = Vec3::Ones();
  DdNoiseParams noise;
  bool noise_on = false;
  int ticks = 500;
  double dt = 0.05;
  double v = 0.5;          // commanded speed (m/s)
  double omega = 0.6;      // turn-rate magnitude (rad/s)
  int anchor_stride = 50;  // ticks between pose anchors
  DdPattern pattern = DdPattern::kFigureEight;
};

struct DdDataset {
  std::vector<EncoderTick> ticks;                 // measured (possibly noisy)
  std::vector<Pose2> truth;                       // pose after each tick, truth[0] = origin
  std::vector<Pose2> anchors;                     // truth sampled every anchor_stride
  std::vector<std::vector<EncoderTick>> segments; // ticks split between anchors
};

/// Generates encoder ticks for a commanded trajectory driven at the true
/// calibration; the figure-eight flips the turn direction halfway.
DdDataset simulate_diffdrive(const DdSimConfig& config, uint64_t seed);

}  // namespace liekit
