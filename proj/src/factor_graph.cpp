#include "liekit/factor_graph.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "liekit/angle.hpp"
#include "liekit/se3.hpp"

namespace liekit {

namespace {

template <class T>
constexpr bool is_pose_block = std::is_same_v<T, Pose2> || std::is_same_v<T, Pose3>;

template <class T>
constexpr bool is_point_block = std::is_same_v<T, Vec2> || std::is_same_v<T, Vec3>;

MatX upper_cholesky(const MatX& info) {
  if (info.rows() != info.cols()) throw std::invalid_argument("information matrix must be square");
  const Eigen::LLT<MatX> llt(info);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("information matrix is not positive definite");
  return llt.matrixU();
}

// Predicted diff-drive delta between two planar poses, in (p, theta)
// coordinates: [R_i^T (p_j - p_i); theta_j - theta_i].
Vec3 predicted_delta(const Pose2& xi, const Pose2& xj) {
  Vec3 d;
  d.head<2>() = xi.rotation().inverse().act(xj.translation() - xi.translation());
  d(2) = wrap_to_pi(xj.angle() - xi.angle());
  return d;
}

}  // namespace

int FactorGraph::push_factor(Factor f, const MatX& info) {
  f.sqrt_info = upper_cholesky(info);
  for (int handle : f.blocks) {
    if (handle < 0 || handle >= state_.num_blocks())
      throw std::invalid_argument("factor references an unknown block handle");
  }
  factors_.push_back(std::move(f));
  return static_cast<int>(factors_.size()) - 1;
}

int FactorGraph::add_prior(int block, BlockValue measured, const MatX& info) {
  if (info.rows() != state_.block_dof(block))
    throw std::invalid_argument("prior information dimension mismatch");
  Factor f;
  f.kind = Factor::Kind::kPrior;
  f.blocks = {block};
  f.prior_value = std::move(measured);
  return push_factor(std::move(f), info);
}

int FactorGraph::add_motion(int from, int to, VecX u, const MatX& info) {
  if (info.rows() != state_.block_dof(from) || u.size() != info.rows())
    throw std::invalid_argument("motion factor dimension mismatch");
  Factor f;
  f.kind = Factor::Kind::kMotion;
  f.blocks = {from, to};
  f.measurement = std::move(u);
  return push_factor(std::move(f), info);
}

int FactorGraph::add_beacon(int pose, int beacon, VecX y, const MatX& info) {
  if (info.rows() != state_.block_dof(beacon) || y.size() != info.rows())
    throw std::invalid_argument("beacon factor dimension mismatch");
  Factor f;
  f.kind = Factor::Kind::kBeacon;
  f.blocks = {pose, beacon};
  f.measurement = std::move(y);
  return push_factor(std::move(f), info);
}

int FactorGraph::add_calibrated_motion(int calib, int from, int to, VecX u_raw, const MatX& info) {
  if (state_.block_dof(calib) != 2 || info.rows() != 3 || u_raw.size() != 3)
    throw std::invalid_argument("calibrated motion factor dimension mismatch");
  Factor f;
  f.kind = Factor::Kind::kCalibratedMotion;
  f.blocks = {calib, from, to};
  f.measurement = std::move(u_raw);
  return push_factor(std::move(f), info);
}

int FactorGraph::add_preint_motion(int calib, int from, int to, const Pose2& delta, const Mat3& jc,
                                   const Vec3& calib_ref, const MatX& info) {
  if (state_.block_dof(calib) != 3 || info.rows() != 3)
    throw std::invalid_argument("pre-integrated motion factor dimension mismatch");
  Factor f;
  f.kind = Factor::Kind::kPreintMotion;
  f.blocks = {calib, from, to};
  f.preint_delta = delta;
  f.preint_jc = jc;
  f.preint_calib_ref = calib_ref;
  return push_factor(std::move(f), info);
}

int FactorGraph::residual_dim() const {
  int dim = 0;
  for (const auto& f : factors_) dim += f.residual_dim();
  return dim;
}

VecX FactorGraph::factor_residual(const Factor& f) const {
  switch (f.kind) {
    case Factor::Kind::kPrior:
      return f.sqrt_info * block_rminus(*f.prior_value, state_.block(f.blocks[0]));

    case Factor::Kind::kMotion:
      return std::visit(
          [&](const auto& xi) -> VecX {
            using T = std::decay_t<decltype(xi)>;
            if constexpr (is_pose_block<T>) {
              const T& xj = state_.block_as<T>(f.blocks[1]);
              const typename T::Tangent u = f.measurement;
              return f.sqrt_info * (u - rminus(xj, xi));
            } else {
              throw std::logic_error("motion factor on a non-pose block");
            }
          },
          state_.block(f.blocks[0]));

    case Factor::Kind::kBeacon:
      return std::visit(
          [&](const auto& xi) -> VecX {
            using T = std::decay_t<decltype(xi)>;
            if constexpr (is_pose_block<T>) {
              const auto& b = state_.block_as<typename T::Point>(f.blocks[1]);
              const typename T::Point y = f.measurement;
              return f.sqrt_info * (y - xi.inverse().act(b));
            } else {
              throw std::logic_error("beacon factor on a non-pose block");
            }
          },
          state_.block(f.blocks[0]));

    case Factor::Kind::kCalibratedMotion: {
      const Vec2& c = state_.block_as<Vec2>(f.blocks[0]);
      const Pose2& xi = state_.block_as<Pose2>(f.blocks[1]);
      const Pose2& xj = state_.block_as<Pose2>(f.blocks[2]);
      const Vec3 u = bias_correct(f.measurement, c);
      return f.sqrt_info * (u - rminus(xj, xi));
    }

    case Factor::Kind::kPreintMotion: {
      const Vec3& c = state_.block_as<Vec3>(f.blocks[0]);
      const Pose2& xi = state_.block_as<Pose2>(f.blocks[1]);
      const Pose2& xj = state_.block_as<Pose2>(f.blocks[2]);
      const Vec3 predicted = predicted_delta(xi, xj);
      // Correct the stored delta to the current calibration estimate;
      // the plus here is plain (p, theta) addition with angle wrapping.
      const Vec3 correction = f.preint_jc * (c - f.preint_calib_ref);
      Vec3 corrected;
      corrected.head<2>() = f.preint_delta->translation() + correction.head<2>();
      corrected(2) = wrap_to_pi(f.preint_delta->angle() + correction(2));
      Vec3 err;
      err.head<2>() = predicted.head<2>() - corrected.head<2>();
      err(2) = wrap_to_pi(predicted(2) - corrected(2));
      return f.sqrt_info * err;
    }
  }
  throw std::logic_error("unknown factor kind");
}

VecX FactorGraph::residuals() const {
  VecX r(residual_dim());
  int row = 0;
  for (const auto& f : factors_) {
    r.segment(row, f.residual_dim()) = factor_residual(f);
    row += f.residual_dim();
  }
  return r;
}

void FactorGraph::factor_jacobian(const Factor& f, MatX& jac, int row) const {
  const auto col = [this](int handle) { return state_.block_offset(handle); };

  switch (f.kind) {
    case Factor::Kind::kPrior:
      std::visit(
          [&](const auto& est) {
            using T = std::decay_t<decltype(est)>;
            if constexpr (is_point_block<T>) {
              jac.block(row, col(f.blocks[0]), est.size(), est.size()) = -f.sqrt_info;
            } else {
              const typename T::Tangent tau = rminus(std::get<T>(*f.prior_value), est);
              jac.block(row, col(f.blocks[0]), T::kDof, T::kDof) = f.sqrt_info * (-T::jl_inv(tau));
            }
          },
          state_.block(f.blocks[0]));
      break;

    case Factor::Kind::kMotion:
    case Factor::Kind::kCalibratedMotion: {
      const int from = f.kind == Factor::Kind::kMotion ? f.blocks[0] : f.blocks[1];
      const int to = f.kind == Factor::Kind::kMotion ? f.blocks[1] : f.blocks[2];
      std::visit(
          [&](const auto& xi) {
            using T = std::decay_t<decltype(xi)>;
            if constexpr (is_pose_block<T>) {
              const T& xj = state_.block_as<T>(to);
              const typename T::Tangent tau = rminus(xj, xi);
              jac.block(row, col(from), T::kDof, T::kDof) = f.sqrt_info * T::jl_inv(tau);
              jac.block(row, col(to), T::kDof, T::kDof) = -f.sqrt_info * T::jr_inv(tau);
            } else {
              throw std::logic_error("motion factor on a non-pose block");
            }
          },
          state_.block(from));
      if (f.kind == Factor::Kind::kCalibratedMotion)
        jac.block(row, col(f.blocks[0]), 3, 2) = f.sqrt_info * jac_bias_correct_wrt_c();
      break;
    }

    case Factor::Kind::kBeacon:
      std::visit(
          [&](const auto& xi) {
            using T = std::decay_t<decltype(xi)>;
            if constexpr (is_pose_block<T>) {
              constexpr int kMeas = T::Point::RowsAtCompileTime;
              const auto& b = state_.block_as<typename T::Point>(f.blocks[1]);
              const T xinv = xi.inverse();
              const auto h = (T::jac_act_group(xinv, b) * (-xi.adjoint())).eval();
              jac.block(row, col(f.blocks[0]), kMeas, T::kDof) = -f.sqrt_info * h;
              jac.block(row, col(f.blocks[1]), kMeas, kMeas) =
                  -f.sqrt_info * T::jac_act_point(xinv, b);
            } else {
              throw std::logic_error("beacon factor on a non-pose block");
            }
          },
          state_.block(f.blocks[0]));
      break;

    case Factor::Kind::kPreintMotion: {
      const Pose2& xi = state_.block_as<Pose2>(f.blocks[1]);
      const Pose2& xj = state_.block_as<Pose2>(f.blocks[2]);
      const Vec3 predicted = predicted_delta(xi, xj);
      // Derivatives of the (p, theta) residual with respect to the SE(2)
      // right-perturbations used by the solver update.
      Mat3 ji = Mat3::Zero();
      ji.topLeftCorner<2, 2>() = -Mat2::Identity();
      ji.topRightCorner<2, 1>() = -hat1() * predicted.head<2>();
      ji(2, 2) = -1.0;
      Mat3 jj = Mat3::Zero();
      jj.topLeftCorner<2, 2>() = (xi.rotation().inverse() * xj.rotation()).matrix();
      jj(2, 2) = 1.0;
      jac.block(row, col(f.blocks[1]), 3, 3) = f.sqrt_info * ji;
      jac.block(row, col(f.blocks[2]), 3, 3) = f.sqrt_info * jj;
      jac.block(row, col(f.blocks[0]), 3, 3) = -f.sqrt_info * f.preint_jc;
      break;
    }
  }
}

MatX FactorGraph::jacobian() const {
  MatX jac = MatX::Zero(residual_dim(), state_.dof());
  int row = 0;
  for (const auto& f : factors_) {
    factor_jacobian(f, jac, row);
    row += f.residual_dim();
  }
  return jac;
}

namespace {

// Eigendecomposition-based deficiency count of the (symmetric PSD) normal
// matrix; these problems are small enough to afford it every step.
int deficiency_of(const MatX& normal, double rel_tol) {
  Eigen::SelfAdjointEigenSolver<MatX> eig(normal);
  const double max_eig = eig.eigenvalues().cwiseAbs().maxCoeff();
  if (max_eig <= 0.0) return static_cast<int>(normal.rows());
  return static_cast<int>((eig.eigenvalues().array() < rel_tol * max_eig).count());
}

}  // namespace

VecX FactorGraph::step() const {
  const MatX jac = jacobian();
  const MatX normal = jac.transpose() * jac;
  const int deficiency = deficiency_of(normal, 1e-12);
  if (deficiency > 0) throw RankDeficiencyError(deficiency, state_.dof());
  return normal.ldlt().solve(-jac.transpose() * residuals());
}

int FactorGraph::rank_deficiency(double rel_tol) const {
  const MatX jac = jacobian();
  return deficiency_of(jac.transpose() * jac, rel_tol);
}

double FactorGraph::cost_at(Composite x) {
  std::swap(state_, x);
  const double c = cost();
  std::swap(state_, x);
  return c;
}

SolveReport FactorGraph::solve(const SolveOptions& options) {
  SolveReport report;
  double cost = this->cost();
  report.initial_cost = cost;
  report.accepted_costs.push_back(cost);

  for (int iter = 0; iter < options.max_iters; ++iter) {
    const MatX jac = jacobian();
    const MatX normal = jac.transpose() * jac;
    const VecX rhs = -jac.transpose() * residuals();

    const int deficiency = deficiency_of(normal, 1e-12);
    if (deficiency > 0) throw RankDeficiencyError(deficiency, state_.dof());

    VecX dx = normal.ldlt().solve(rhs);
    Composite candidate = state_.dplus(dx);
    double candidate_cost = cost_at(candidate);

    // Plain Gauss-Newton by default; Levenberg damping only after an
    // overshoot.
    double lambda = options.damping_initial;
    int boosts = 0;
    while (candidate_cost > cost && boosts < options.max_damping_boosts) {
      dx = (normal + lambda * MatX::Identity(normal.rows(), normal.cols())).ldlt().solve(rhs);
      candidate = state_.dplus(dx);
      candidate_cost = cost_at(candidate);
      lambda *= 10.0;
      ++boosts;
    }
    if (candidate_cost > cost) break;  // no acceptable step left

    state_ = std::move(candidate);
    report.iterations = iter + 1;
    const double previous = cost;
    cost = candidate_cost;
    report.accepted_costs.push_back(cost);

    if (dx.cwiseAbs().maxCoeff() < options.step_tol ||
        previous - cost < options.cost_rel_tol * std::max(previous, 1e-300)) {
      report.converged = true;
      break;
    }
  }
  report.final_cost = cost;
  return report;
}

void FactorGraph::initialize_from_factors() {
  std::vector<bool> ready(state_.num_blocks(), false);
  // Calibration blocks keep their current values.
  for (const auto& f : factors_) {
    if (f.kind == Factor::Kind::kCalibratedMotion || f.kind == Factor::Kind::kPreintMotion)
      ready[f.blocks[0]] = true;
    if (f.kind == Factor::Kind::kPrior) {
      state_.set_block(f.blocks[0], *f.prior_value);
      ready[f.blocks[0]] = true;
    }
  }

  // Dead-reckon poses through the motion chain until nothing changes.
  bool progress = true;
  while (progress) {
    progress = false;
    for (const auto& f : factors_) {
      int from = -1, to = -1;
      if (f.kind == Factor::Kind::kMotion) {
        from = f.blocks[0];
        to = f.blocks[1];
      } else if (f.kind == Factor::Kind::kCalibratedMotion ||
                 f.kind == Factor::Kind::kPreintMotion) {
        from = f.blocks[1];
        to = f.blocks[2];
      } else {
        continue;
      }
      if (!ready[from] || ready[to]) continue;

      if (f.kind == Factor::Kind::kPreintMotion) {
        state_.set_block(to, state_.block_as<Pose2>(from) * *f.preint_delta);
      } else {
        VecX u = f.measurement;
        if (f.kind == Factor::Kind::kCalibratedMotion)
          u = bias_correct(u, state_.block_as<Vec2>(f.blocks[0]));
        state_.set_block(to, block_rplus(state_.block(from), u));
      }
      ready[to] = true;
      progress = true;
    }
  }

  // Beacons: back-project the first measurement taken from a ready pose.
  for (const auto& f : factors_) {
    if (f.kind != Factor::Kind::kBeacon) continue;
    if (ready[f.blocks[1]] || !ready[f.blocks[0]]) continue;
    std::visit(
        [&](const auto& xi) {
          using T = std::decay_t<decltype(xi)>;
          if constexpr (is_pose_block<T>) {
            const typename T::Point y = f.measurement;
            state_.set_block(f.blocks[1], BlockValue(typename T::Point(xi.act(y))));
          }
        },
        state_.block(f.blocks[0]));
    ready[f.blocks[1]] = true;
  }
}

}  // namespace liekit
