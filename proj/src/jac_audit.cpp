#include "liekit/jac_audit.hpp"

#include <random>

#include "liekit/composite.hpp"
#include "liekit/core.hpp"
#include "liekit/diffdrive.hpp"
#include "liekit/eskf.hpp"
#include "liekit/factor_graph.hpp"
#include "liekit/numdiff.hpp"
#include "liekit/trans.hpp"

namespace liekit {

namespace {

class Sampler {
 public:
  explicit Sampler(uint64_t seed) : gen_(seed) {}

  double uniform(double lo, double hi) {
    std::uniform_real_distribution<double> d(lo, hi);
    return d(gen_);
  }

  template <int N>
  Eigen::Matrix<double, N, 1> vec(double lo, double hi) {
    Eigen::Matrix<double, N, 1> v;
    for (int i = 0; i < N; ++i) v(i) = uniform(lo, hi);
    return v;
  }

  double angle() { return uniform(-2.2, 2.2); }

  Vec3 rotvec() {
    Vec3 axis = vec<3>(-1.0, 1.0);
    while (axis.norm() < 1e-3) axis = vec<3>(-1.0, 1.0);
    return axis.normalized() * uniform(1e-2, 2.2);
  }

  Rot2 rot2() { return Rot2::Exp(angle()); }
  UnitComplex s1() { return UnitComplex::Exp(angle()); }
  Rot3 rot3() { return Rot3::Exp(rotvec()); }
  UnitQuaternion s3() { return UnitQuaternion::Exp(rotvec()); }
  Pose2 pose2() { return Pose2(rot2(), vec<2>(-2.0, 2.0)); }
  Pose3 pose3() { return Pose3(rot3(), vec<3>(-2.0, 2.0)); }

  Vec3 twist2() {
    Vec3 tau;
    tau.head<2>() = vec<2>(-2.0, 2.0);
    tau(2) = angle();
    return tau;
  }

  Vec6 twist3() {
    Vec6 tau;
    tau.head<3>() = vec<3>(-2.0, 2.0);
    tau.tail<3>() = rotvec();
    return tau;
  }

 private:
  std::mt19937_64 gen_;
};

using BlockFn = std::function<std::pair<MatX, MatX>(Sampler&)>;

// Group-generic block set: adjoint, inverse, composition, Jr/Jl, the four
// plus/minus blocks, Log, and the action pair.
template <class G, class SampleG, class SampleTau, class SamplePoint>
void register_group(std::vector<std::pair<std::string, BlockFn>>& blocks, const std::string& prefix,
                    SampleG sample_g, SampleTau sample_tau, SamplePoint sample_point) {
  using Tangent = typename G::Tangent;

  blocks.emplace_back(prefix + ".adjoint", [=](Sampler& s) -> std::pair<MatX, MatX> {
    const G x = sample_g(s);
    const Tangent at = Tangent::Zero();
    return {x.adjoint(),
            jac_numeric([&x](const Tangent& t) { return lminus(rplus(x, t), x); }, at)};
  });
  blocks.emplace_back(prefix + ".inverse", [=](Sampler& s) -> std::pair<MatX, MatX> {
    const G x = sample_g(s);
    return {jac_inverse(x), jac_numeric([](const G& g) { return g.inverse(); }, x)};
  });
  blocks.emplace_back(prefix + ".compose_lhs", [=](Sampler& s) -> std::pair<MatX, MatX> {
    const G x = sample_g(s), y = sample_g(s);
    return {jac_compose_lhs(x, y), jac_numeric([&y](const G& g) { return g * y; }, x)};
  });
  blocks.emplace_back(prefix + ".compose_rhs", [=](Sampler& s) -> std::pair<MatX, MatX> {
    const G x = sample_g(s), y = sample_g(s);
    return {jac_compose_rhs(x, y), jac_numeric([&x](const G& g) { return x * g; }, y)};
  });
  blocks.emplace_back(prefix + ".jr", [=](Sampler& s) -> std::pair<MatX, MatX> {
    const Tangent tau = sample_tau(s);
    return {G::jr(tau), jac_numeric([](const Tangent& t) { return G::Exp(t); }, tau)};
  });
  blocks.emplace_back(prefix + ".jl", [=](Sampler& s) -> std::pair<MatX, MatX> {
    const Tangent tau = sample_tau(s);
    return {G::jl(tau), jac_numeric_left([](const Tangent& t) { return G::Exp(t); }, tau)};
  });
  blocks.emplace_back(prefix + ".rplus_x", [=](Sampler& s) -> std::pair<MatX, MatX> {
    const G x = sample_g(s);
    const Tangent tau = sample_tau(s);
    return {jac_rplus_wrt_x<G>(tau), jac_numeric([&tau](const G& g) { return rplus(g, tau); }, x)};
  });
  blocks.emplace_back(prefix + ".rplus_tau", [=](Sampler& s) -> std::pair<MatX, MatX> {
    const G x = sample_g(s);
    const Tangent tau = sample_tau(s);
    return {jac_rplus_wrt_tau<G>(tau), jac_numeric([&x](const Tangent& t) { return rplus(x, t); }, tau)};
  });
  blocks.emplace_back(prefix + ".rminus_y", [=](Sampler& s) -> std::pair<MatX, MatX> {
    const G x = sample_g(s), y = sample_g(s);
    return {jac_rminus_wrt_y<G>(rminus(y, x)),
            jac_numeric([&x](const G& g) { return rminus(g, x); }, y)};
  });
  blocks.emplace_back(prefix + ".rminus_x", [=](Sampler& s) -> std::pair<MatX, MatX> {
    const G x = sample_g(s), y = sample_g(s);
    return {jac_rminus_wrt_x<G>(rminus(y, x)),
            jac_numeric([&y](const G& g) { return rminus(y, g); }, x)};
  });
  blocks.emplace_back(prefix + ".log", [=](Sampler& s) -> std::pair<MatX, MatX> {
    const G x = sample_g(s);
    return {jac_log(x), jac_numeric([](const G& g) { return g.log(); }, x)};
  });
  blocks.emplace_back(prefix + ".act_group", [=](Sampler& s) -> std::pair<MatX, MatX> {
    const G x = sample_g(s);
    const auto p = sample_point(s);
    return {G::jac_act_group(x, p), jac_numeric([&p](const G& g) { return g.act(p); }, x)};
  });
  blocks.emplace_back(prefix + ".act_point", [=](Sampler& s) -> std::pair<MatX, MatX> {
    const G x = sample_g(s);
    const auto p = sample_point(s);
    return {G::jac_act_point(x, p), jac_numeric([&x](const auto& q) { return x.act(q); }, p)};
  });
}

std::vector<std::pair<std::string, BlockFn>> build_registry() {
  std::vector<std::pair<std::string, BlockFn>> blocks;

  register_group<Rot2>(
      blocks, "rot2", [](Sampler& s) { return s.rot2(); },
      [](Sampler& s) { return Vec1(s.angle()); }, [](Sampler& s) { return s.vec<2>(-3.0, 3.0); });
  register_group<Rot3>(
      blocks, "rot3", [](Sampler& s) { return s.rot3(); }, [](Sampler& s) { return s.rotvec(); },
      [](Sampler& s) { return s.vec<3>(-3.0, 3.0); });
  register_group<Pose2>(
      blocks, "se2", [](Sampler& s) { return s.pose2(); }, [](Sampler& s) { return s.twist2(); },
      [](Sampler& s) { return s.vec<2>(-3.0, 3.0); });
  register_group<Pose3>(
      blocks, "se3", [](Sampler& s) { return s.pose3(); }, [](Sampler& s) { return s.twist3(); },
      [](Sampler& s) { return s.vec<3>(-3.0, 3.0); });

  // The alternate rotation representations share the tangent, so checking
  // their own action and inverse blocks covers the representation switch.
  blocks.emplace_back("s1.act_group", [](Sampler& s) -> std::pair<MatX, MatX> {
    const UnitComplex z = s.s1();
    const Vec2 p = s.vec<2>(-3.0, 3.0);
    return {UnitComplex::jac_act_group(z, p),
            jac_numeric([&p](const UnitComplex& g) { return g.act(p); }, z)};
  });
  blocks.emplace_back("s3.act_group", [](Sampler& s) -> std::pair<MatX, MatX> {
    const UnitQuaternion q = s.s3();
    const Vec3 p = s.vec<3>(-3.0, 3.0);
    return {UnitQuaternion::jac_act_group(q, p),
            jac_numeric([&p](const UnitQuaternion& g) { return g.act(p); }, q)};
  });
  blocks.emplace_back("s3.inverse", [](Sampler& s) -> std::pair<MatX, MatX> {
    const UnitQuaternion q = s.s3();
    return {jac_inverse(q), jac_numeric([](const UnitQuaternion& g) { return g.inverse(); }, q)};
  });

  blocks.emplace_back("trans3.inverse", [](Sampler& s) -> std::pair<MatX, MatX> {
    const Vec3 t = s.vec<3>(-4.0, 4.0);
    return {trans_jac_inverse<3>(t), jac_numeric([](const Vec3& v) { return trans_inverse<3>(v); }, t)};
  });
  blocks.emplace_back("trans3.compose", [](Sampler& s) -> std::pair<MatX, MatX> {
    const Vec3 t = s.vec<3>(-4.0, 4.0), u = s.vec<3>(-4.0, 4.0);
    return {trans_jr<3>(t), jac_numeric([&u](const Vec3& v) { return trans_compose<3>(v, u); }, t)};
  });
  blocks.emplace_back("trans3.jr", [](Sampler& s) -> std::pair<MatX, MatX> {
    const Vec3 t = s.vec<3>(-4.0, 4.0);
    return {trans_jr<3>(t), jac_numeric([](const Vec3& v) { return trans_exp<3>(v); }, t)};
  });

  // Estimation blocks: the chained beacon-measurement Jacobians and the
  // bias-correction Jacobian.
  blocks.emplace_back("estimation.h_beacon_2d", [](Sampler& s) -> std::pair<MatX, MatX> {
    Eskf<Pose2> filter(s.pose2(), Mat3(0.01 * Mat3::Identity()));
    const Vec2 b = s.vec<2>(-4.0, 4.0);
    return {filter.measurement_jacobian(b),
            jac_numeric([&b](const Pose2& x) { return x.inverse().act(b); }, filter.mean())};
  });
  blocks.emplace_back("estimation.h_beacon_3d", [](Sampler& s) -> std::pair<MatX, MatX> {
    Eskf<Pose3> filter(s.pose3(), Mat6(0.01 * Mat6::Identity()));
    const Vec3 b = s.vec<3>(-4.0, 4.0);
    return {filter.measurement_jacobian(b),
            jac_numeric([&b](const Pose3& x) { return x.inverse().act(b); }, filter.mean())};
  });
  blocks.emplace_back("estimation.bias_correct", [](Sampler& s) -> std::pair<MatX, MatX> {
    const Vec3 u = s.twist2();
    const Vec2 c = s.vec<2>(-0.1, 0.1);
    return {jac_bias_correct_wrt_c(),
            jac_numeric([&u](const Vec2& cc) { return bias_correct(u, cc); }, c)};
  });

  // Differential-drive blocks.
  const WheelParams wheel{0.1, 0.11, 0.4};
  const auto sample_calib = [](Sampler& s) {
    return Calib(s.uniform(0.9, 1.1), s.uniform(0.9, 1.1), s.uniform(0.9, 1.1));
  };
  blocks.emplace_back("dd.body_wrt_ticks", [=](Sampler& s) -> std::pair<MatX, MatX> {
    const Calib c = sample_calib(s);
    const Vec2 psi = s.vec<2>(-1.5, 1.5);
    return {jac_body_wrt_ticks(c, wheel), jac_numeric(
                                              [&](const Vec2& p) {
                                                const BodyMag b =
                                                    body_magnitudes({p(0), p(1)}, c, wheel);
                                                return Vec2(b.dl, b.dtheta);
                                              },
                                              psi)};
  });
  blocks.emplace_back("dd.body_wrt_calib", [=](Sampler& s) -> std::pair<MatX, MatX> {
    const Calib c = sample_calib(s);
    const EncoderTick y{s.uniform(-1.5, 1.5), s.uniform(-1.5, 1.5)};
    return {jac_body_wrt_calib(y, c, wheel), jac_numeric(
                                                 [&](const Vec3& cc) {
                                                   const BodyMag b = body_magnitudes(y, cc, wheel);
                                                   return Vec2(b.dl, b.dtheta);
                                                 },
                                                 Vec3(c))};
  });
  const auto chart = [](const Pose2& p) {
    return Vec3(p.translation().x(), p.translation().y(), p.angle());
  };
  blocks.emplace_back("dd.delta_arc", [=](Sampler& s) -> std::pair<MatX, MatX> {
    const BodyMag b{s.uniform(-1.0, 1.0), s.uniform(0.2, 2.0) * (s.uniform(-1, 1) > 0 ? 1 : -1)};
    return {jac_delta_wrt_body(b),
            jac_numeric([&](const Vec2& v) { return chart(delta_from_body({v(0), v(1)})); },
                        Vec2(b.dl, b.dtheta))};
  });
  blocks.emplace_back("dd.delta_straight", [=](Sampler& s) -> std::pair<MatX, MatX> {
    // Force the straight-line branch on both sides so central differences
    // can use the full step without crossing the threshold.
    const BodyMag b{s.uniform(-1.0, 1.0), s.uniform(-5e-7, 5e-7)};
    return {jac_delta_wrt_body(b, 1.0),
            jac_numeric([&](const Vec2& v) { return chart(delta_from_body({v(0), v(1)}, 1.0)); },
                        Vec2(b.dl, b.dtheta))};
  });
  blocks.emplace_back("dd.compose_wrt_acc", [=](Sampler& s) -> std::pair<MatX, MatX> {
    const Pose2 acc(s.uniform(-2, 2), s.uniform(-2, 2), s.angle());
    const Pose2 step(s.uniform(-0.5, 0.5), s.uniform(-0.5, 0.5), s.uniform(-0.5, 0.5));
    return {jac_compose_wrt_acc(acc, step),
            jac_numeric(
                [&](const Vec3& a) { return chart(delta_compose(Pose2(a(0), a(1), a(2)), step)); },
                chart(acc))};
  });
  blocks.emplace_back("dd.compose_wrt_step", [=](Sampler& s) -> std::pair<MatX, MatX> {
    const Pose2 acc(s.uniform(-2, 2), s.uniform(-2, 2), s.angle());
    const Pose2 step(s.uniform(-0.5, 0.5), s.uniform(-0.5, 0.5), s.uniform(-0.5, 0.5));
    return {jac_compose_wrt_step(acc),
            jac_numeric(
                [&](const Vec3& d) { return chart(delta_compose(acc, Pose2(d(0), d(1), d(2)))); },
                chart(step))};
  });
  blocks.emplace_back("dd.preint_jc", [=](Sampler& s) -> std::pair<MatX, MatX> {
    const Calib c = sample_calib(s);
    std::vector<EncoderTick> ticks;
    for (int k = 0; k < 15; ++k) ticks.push_back({s.uniform(-0.4, 0.6), s.uniform(-0.4, 0.6)});
    const PreintDelta pre = preintegrate(ticks, c, wheel, DdNoiseParams{});
    MatX numeric(3, 3);
    const double eps = 1e-6;
    for (int i = 0; i < 3; ++i) {
      Calib cp = c, cm = c;
      cp(i) += eps;
      cm(i) -= eps;
      Vec3 diff = chart(preintegrate(ticks, cp, wheel, DdNoiseParams{}).delta) -
                  chart(preintegrate(ticks, cm, wheel, DdNoiseParams{}).delta);
      diff(2) = wrap_to_pi(diff(2));
      numeric.col(i) = diff / (2.0 * eps);
    }
    return {pre.jc, numeric};
  });

  // Residual blocks of the pre-integrated factor against the composite
  // oracle, exercising the solver-facing derivatives.
  blocks.emplace_back("dd.preint_residual", [=](Sampler& s) -> std::pair<MatX, MatX> {
    const Calib c = sample_calib(s);
    std::vector<EncoderTick> ticks;
    for (int k = 0; k < 10; ++k) ticks.push_back({s.uniform(0.0, 0.6), s.uniform(0.0, 0.6)});
    const PreintDelta pre = preintegrate(ticks, c, wheel, DdNoiseParams{});

    Composite state;
    const int cb = state.add(BlockValue(Vec3(c + Vec3(0.01, -0.02, 0.015))));
    const int xi = state.add(BlockValue(Pose2(s.uniform(-1, 1), s.uniform(-1, 1), s.angle())));
    const int xj = state.add(BlockValue(Pose2(s.uniform(-1, 1), s.uniform(-1, 1), s.angle())));
    FactorGraph graph(std::move(state));
    graph.add_preint_motion(cb, xi, xj, pre.delta, pre.jc, c,
                            MatX((pre.cov + 1e-8 * Mat3::Identity()).inverse()));
    const MatX numeric = jac_composite(
        [&graph](const Composite& x) {
          FactorGraph probe = graph;
          probe.mutable_state() = x;
          return probe.residuals();
        },
        graph.state());
    return {graph.jacobian(), numeric};
  });

  return blocks;
}

}  // namespace

JacAuditReport run_jacobian_audit(uint64_t seed, int trials, double tolerance,
                                  const JacMutator& mutate) {
  JacAuditReport report;
  report.seed = seed;
  report.trials = trials;
  report.tolerance = tolerance;
  report.all_pass = true;

  const auto registry = build_registry();
  uint64_t block_seed = seed;
  for (const auto& [name, fn] : registry) {
    Sampler sampler(block_seed++);
    JacCheckResult result;
    result.name = name;
    for (int trial = 0; trial < trials; ++trial) {
      auto [analytic, numeric] = fn(sampler);
      if (mutate) mutate(name, analytic);
      result.max_rel_err = std::max(result.max_rel_err, jac_rel_error(analytic, numeric));
    }
    result.pass = result.max_rel_err <= tolerance;
    report.all_pass = report.all_pass && result.pass;
    report.results.push_back(std::move(result));
  }
  return report;
}

}  // namespace liekit
