#pragma once

// Composite (bundle) manifolds: an ordered concatenation of non-interacting
// blocks drawn from the closed set of implemented groups. The diamond
// operations act blockwise, and tangents are stacked into one vector whose
// layout is fixed at construction (block handles are stable indices, which
// gives solvers a fixed column-addressing scheme).

#include <variant>
#include <vector>

#include "liekit/core.hpp"
#include "liekit/rot2.hpp"
#include "liekit/rot3.hpp"
#include "liekit/se2.hpp"
#include "liekit/se3.hpp"
#include "liekit/types.hpp"

namespace liekit {

using BlockValue = std::variant<UnitComplex, Rot2, UnitQuaternion, Rot3, Pose2, Pose3, Vec2, Vec3>;

int block_dof(const BlockValue& b);
BlockValue block_identity(const BlockValue& b);
BlockValue block_inverse(const BlockValue& b);
BlockValue block_compose(const BlockValue& a, const BlockValue& b);
BlockValue block_rplus(const BlockValue& x, const Eigen::Ref<const VecX>& tau);
VecX block_rminus(const BlockValue& y, const BlockValue& x);

class Composite {
 public:
  using Tangent = VecX;

  Composite() = default;

  /// Appends a block and returns its stable handle.
  int add(BlockValue block);

  int num_blocks() const { return static_cast<int>(blocks_.size()); }
  int dof() const { return dof_; }
  int block_offset(int handle) const { return offsets_.at(handle); }
  int block_dof(int handle) const;

  const BlockValue& block(int handle) const { return blocks_.at(handle); }
  void set_block(int handle, BlockValue value);

  template <class G>
  const G& block_as(int handle) const {
    return std::get<G>(blocks_.at(handle));
  }

  /// Blockwise identity with this composite's layout.
  Composite identity() const;
  /// Diamond inverse: blockwise inverses.
  Composite dinverse() const;
  /// Diamond composition: blockwise composition. Layouts must match.
  Composite dcompose(const Composite& other) const;

  /// Blockwise Log.
  VecX dlog() const;

  /// Right-plus with a stacked tangent: X <> Exp<tau>.
  Composite dplus(const Eigen::Ref<const VecX>& tau) const;
  /// Right-minus: Log<X^<> <> Y>, the stacked tangent from this to y.
  VecX dminus(const Composite& x) const;

 private:
  void check_layout(const Composite& other) const;

  std::vector<BlockValue> blocks_;
  std::vector<int> offsets_;
  int dof_ = 0;
};

// Alias the generic plus/minus spellings so the numeric oracle and the
// uncertainty machinery work on composites unchanged.
inline Composite rplus(const Composite& x, const Eigen::Ref<const VecX>& tau) { return x.dplus(tau); }
inline VecX rminus(const Composite& y, const Composite& x) { return y.dminus(x); }
inline int dof_of(const Composite& x) { return x.dof(); }
inline VecX zero_tangent(const Composite& x) { return VecX::Zero(x.dof()); }

/// Assembles the full Jacobian of f at x block column by block column,
/// perturbing one block at a time through the diamond operators.
template <class F>
MatX jac_composite(const F& f, const Composite& x, double eps = 1e-6) {
  const auto y0 = f(x);
  const int n = dof_of(rminus(y0, y0));
  MatX jac(n, x.dof());
  for (int b = 0; b < x.num_blocks(); ++b) {
    const int off = x.block_offset(b);
    const int bd = x.block_dof(b);
    VecX tau = VecX::Zero(x.dof());
    for (int i = 0; i < bd; ++i) {
      tau.setZero();
      tau(off + i) = eps;
      const VecX sp = rminus(f(x.dplus(tau)), y0);
      tau(off + i) = -eps;
      const VecX sm = rminus(f(x.dplus(tau)), y0);
      jac.col(off + i) = (sp - sm) / (2.0 * eps);
    }
  }
  return jac;
}

}  // namespace liekit
