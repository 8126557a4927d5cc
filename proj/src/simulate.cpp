#include "liekit/simulate.hpp"

#include <Eigen/Cholesky>
#include <algorithm>

namespace liekit {

namespace {

template <class Pose>
typename Pose::Tangent twist_of(const SimConfig& c);

template <>
Vec3 twist_of<Pose2>(const SimConfig& c) {
  return Vec3(c.v * c.dt, 0.0, c.omega * c.dt);
}

template <>
Vec6 twist_of<Pose3>(const SimConfig& c) {
  Vec6 u = Vec6::Zero();
  u(0) = c.v * c.dt;
  u(5) = c.omega * c.dt;
  return u;
}

template <class Pose>
typename Dataset<Pose>::ProcessCov process_cov_of(const SimConfig& c);

template <>
Dataset<Pose2>::ProcessCov process_cov_of<Pose2>(const SimConfig& c) {
  return Vec3(c.sigma_v * c.sigma_v * c.dt, c.sigma_s * c.sigma_s * c.dt,
              c.sigma_w * c.sigma_w * c.dt)
      .asDiagonal();
}

template <>
Dataset<Pose3>::ProcessCov process_cov_of<Pose3>(const SimConfig& c) {
  Vec6 d;
  d << c.sigma_v * c.sigma_v * c.dt, c.sigma_s * c.sigma_s * c.dt, c.sigma_s * c.sigma_s * c.dt,
      c.sigma_w * c.sigma_w * c.dt, c.sigma_w * c.sigma_w * c.dt, c.sigma_w * c.sigma_w * c.dt;
  return d.asDiagonal();
}

}  // namespace

SimConfig SimConfig::default_2d() {
  SimConfig c;
  c.beacons = {VecX(Vec2(3.0, 0.0)), VecX(Vec2(0.0, 4.0)), VecX(Vec2(-3.0, 1.0))};
  return c;
}

SimConfig SimConfig::default_3d() {
  SimConfig c;
  c.beacons = {VecX(Vec3(3.0, 0.0, 1.0)), VecX(Vec3(0.0, 4.0, -1.0)), VecX(Vec3(-3.0, 1.0, 2.0))};
  return c;
}

template <class Pose>
Dataset<Pose> simulate_dataset(const SimConfig& config, uint64_t seed) {
  using Tangent = typename Pose::Tangent;
  using Point = typename Pose::Point;
  constexpr int kMeasDim = Point::RowsAtCompileTime;

  Dataset<Pose> data;
  data.process_cov = process_cov_of<Pose>(config);
  for (const auto& b : config.beacons) {
    if (b.size() != kMeasDim) throw std::invalid_argument("beacon dimension does not match the pose type");
    data.beacons.push_back(Point(b));
  }
  data.meas_cov = (config.sigma_xy * config.sigma_xy) *
                  Dataset<Pose>::MeasCov::Identity();

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const auto noise_vec = [&](const auto& cov) {
    typename std::decay_t<decltype(cov)>::PlainObject l =
        Eigen::LLT<typename std::decay_t<decltype(cov)>::PlainObject>(cov).matrixL();
    Eigen::Matrix<double, std::decay_t<decltype(cov)>::RowsAtCompileTime, 1> unit;
    for (int i = 0; i < unit.size(); ++i) unit(i) = gauss(rng);
    return (l * unit).eval();
  };

  const auto measure_all = [&](const Pose& pose) {
    std::vector<std::pair<int, Point>> step_meas;
    for (int b = 0; b < static_cast<int>(data.beacons.size()); ++b) {
      Point y = pose.inverse().act(data.beacons[b]);
      if (config.noise) y += noise_vec(data.meas_cov);
      step_meas.emplace_back(b, y);
    }
    return step_meas;
  };

  const Tangent u_true = twist_of<Pose>(config);
  Pose pose;  // identity start
  data.truth.push_back(pose);
  data.measurements.push_back(measure_all(pose));
  for (int k = 0; k < config.steps; ++k) {
    pose = rplus(pose, u_true);
    data.truth.push_back(pose);

    Tangent u_meas = u_true;
    if (config.noise) u_meas += noise_vec(data.process_cov);
    data.controls.push_back(u_meas);
    data.measurements.push_back(measure_all(pose));
  }
  return data;
}

std::vector<std::pair<int, int>> three_pose_visibility() {
  // Pose indices 0..2 and beacon ids 0..2, matching the 3-pose problem:
  // poses 1 sees beacons 4,5; pose 2 sees 5,6; pose 3 sees 6.
  return {{0, 0}, {0, 1}, {1, 1}, {1, 2}, {2, 2}};
}

template <class Pose>
void inject_control_bias(Dataset<Pose>& dataset, const Vec2& bias) {
  static_assert(std::is_same_v<Pose, Pose2>, "control bias is a planar-sensor model");
  for (auto& u : dataset.controls) {
    u(0) += bias(0);
    u(2) += bias(1);
  }
}

template <class Pose>
FactorGraph build_sam_graph(const Dataset<Pose>& dataset,
                            const std::vector<std::pair<int, int>>& visibility, SamLayout& layout,
                            bool estimate_bias) {
  using Point = typename Pose::Point;
  const int num_poses = static_cast<int>(dataset.controls.size()) + 1;

  layout = SamLayout{};
  Composite state;
  if (estimate_bias) {
    if constexpr (std::is_same_v<Pose, Pose2>) {
      layout.calib = state.add(BlockValue(Vec2(Vec2::Zero())));
    } else {
      throw std::invalid_argument("bias self-calibration is built for the planar problem");
    }
  }
  for (int i = 0; i < num_poses; ++i) layout.poses.push_back(state.add(BlockValue(Pose())));
  for (const auto& b : dataset.beacons) layout.beacons.push_back(state.add(BlockValue(Point(b))));

  FactorGraph graph(std::move(state));

  // Prior on the first pose at its true value; tight but finite.
  const MatX prior_info =
      1e8 * MatX::Identity(Pose::kDof, Pose::kDof);
  graph.add_prior(layout.poses[0], BlockValue(dataset.truth[0]), prior_info);

  const MatX motion_info = dataset.process_cov.inverse();
  for (int k = 0; k < static_cast<int>(dataset.controls.size()); ++k) {
    if (estimate_bias) {
      if constexpr (std::is_same_v<Pose, Pose2>) {
        graph.add_calibrated_motion(layout.calib, layout.poses[k], layout.poses[k + 1],
                                    VecX(dataset.controls[k]), motion_info);
      }
    } else {
      graph.add_motion(layout.poses[k], layout.poses[k + 1], VecX(dataset.controls[k]), motion_info);
    }
  }

  const MatX beacon_info = dataset.meas_cov.inverse();
  for (const auto& [pose_idx, beacon_id] : visibility) {
    const auto& step = dataset.measurements.at(pose_idx);
    const auto it = std::find_if(step.begin(), step.end(),
                                 [beacon_id](const auto& m) { return m.first == beacon_id; });
    if (it == step.end()) throw std::invalid_argument("visibility pair has no measurement");
    graph.add_beacon(layout.poses[pose_idx], layout.beacons[beacon_id], VecX(it->second),
                     beacon_info);
  }

  graph.initialize_from_factors();
  return graph;
}

DdDataset simulate_diffdrive(const DdSimConfig& config, uint64_t seed) {
  if (config.ticks < 1 || config.anchor_stride < 1)
    throw std::invalid_argument("simulate_diffdrive: ticks and anchor_stride must be positive");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  DdDataset data;
  Pose2 pose;
  data.truth.push_back(pose);
  data.anchors.push_back(pose);
  data.segments.emplace_back();

  const double big_d = config.wheel.d * config.calib_true(2);
  for (int k = 0; k < config.ticks; ++k) {
    const double turn =
        config.pattern == DdPattern::kStraight
            ? 0.0
            : (k < config.ticks / 2 ? config.omega : -config.omega);
    const double dl = config.v * config.dt;
    const double dtheta = turn * config.dt;

    // Invert the body magnitudes at the true calibration to get the clean
    // encoder increments.
    EncoderTick clean;
    clean.dpsi_r = (dl + 0.5 * big_d * dtheta) / (config.wheel.r_r * config.calib_true(1));
    clean.dpsi_l = (dl - 0.5 * big_d * dtheta) / (config.wheel.r_l * config.calib_true(0));

    pose = pose * delta_from_body(body_magnitudes(clean, config.calib_true, config.wheel));
    data.truth.push_back(pose);

    EncoderTick measured = clean;
    if (config.noise_on) {
      const Mat2 q = encoder_noise_cov(clean, config.noise);
      measured.dpsi_l += std::sqrt(q(0, 0)) * gauss(rng);
      measured.dpsi_r += std::sqrt(q(1, 1)) * gauss(rng);
    }
    data.ticks.push_back(measured);
    data.segments.back().push_back(measured);

    if ((k + 1) % config.anchor_stride == 0 && k + 1 < config.ticks) {
      data.anchors.push_back(pose);
      data.segments.emplace_back();
    }
  }
  data.anchors.push_back(pose);
  return data;
}

template Dataset<Pose2> simulate_dataset<Pose2>(const SimConfig&, uint64_t);
template Dataset<Pose3> simulate_dataset<Pose3>(const SimConfig&, uint64_t);
template void inject_control_bias<Pose2>(Dataset<Pose2>&, const Vec2&);
template FactorGraph build_sam_graph<Pose2>(const Dataset<Pose2>&,
                                            const std::vector<std::pair<int, int>>&, SamLayout&,
                                            bool);
template FactorGraph build_sam_graph<Pose3>(const Dataset<Pose3>&,
                                            const std::vector<std::pair<int, int>>&, SamLayout&,
                                            bool);

}  // namespace liekit
