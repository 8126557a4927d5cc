#include "liekit/composite.hpp"

#include <stdexcept>

namespace liekit {

namespace {

template <class T>
constexpr bool is_vector_block = std::is_same_v<T, Vec2> || std::is_same_v<T, Vec3>;

}  // namespace

int block_dof(const BlockValue& b) {
  return std::visit(
      [](const auto& v) -> int {
        using T = std::decay_t<decltype(v)>;
        if constexpr (is_vector_block<T>)
          return static_cast<int>(v.size());
        else
          return T::kDof;
      },
      b);
}

BlockValue block_identity(const BlockValue& b) {
  return std::visit(
      [](const auto& v) -> BlockValue {
        using T = std::decay_t<decltype(v)>;
        if constexpr (is_vector_block<T>)
          return T(T::Zero());
        else
          return T::Identity();
      },
      b);
}

BlockValue block_inverse(const BlockValue& b) {
  return std::visit(
      [](const auto& v) -> BlockValue {
        using T = std::decay_t<decltype(v)>;
        if constexpr (is_vector_block<T>)
          return T(-v);
        else
          return v.inverse();
      },
      b);
}

BlockValue block_compose(const BlockValue& a, const BlockValue& b) {
  if (a.index() != b.index()) throw std::invalid_argument("block_compose: mismatched block kinds");
  return std::visit(
      [&b](const auto& va) -> BlockValue {
        using T = std::decay_t<decltype(va)>;
        const T& vb = std::get<T>(b);
        if constexpr (is_vector_block<T>)
          return T(va + vb);
        else
          return va * vb;
      },
      a);
}

BlockValue block_rplus(const BlockValue& x, const Eigen::Ref<const VecX>& tau) {
  return std::visit(
      [&tau](const auto& v) -> BlockValue {
        using T = std::decay_t<decltype(v)>;
        if constexpr (is_vector_block<T>) {
          if (tau.size() != v.size()) throw std::invalid_argument("block_rplus: tangent size mismatch");
          return T(v + tau);
        } else {
          if (tau.size() != T::kDof) throw std::invalid_argument("block_rplus: tangent size mismatch");
          const typename T::Tangent t = tau;
          return rplus(v, t);
        }
      },
      x);
}

VecX block_rminus(const BlockValue& y, const BlockValue& x) {
  if (y.index() != x.index()) throw std::invalid_argument("block_rminus: mismatched block kinds");
  return std::visit(
      [&x](const auto& vy) -> VecX {
        using T = std::decay_t<decltype(vy)>;
        const T& vx = std::get<T>(x);
        if constexpr (is_vector_block<T>)
          return vy - vx;
        else
          return rminus(vy, vx);
      },
      y);
}

int Composite::add(BlockValue block) {
  offsets_.push_back(dof_);
  dof_ += liekit::block_dof(block);
  blocks_.push_back(std::move(block));
  return num_blocks() - 1;
}

int Composite::block_dof(int handle) const { return liekit::block_dof(blocks_.at(handle)); }

void Composite::set_block(int handle, BlockValue value) {
  if (value.index() != blocks_.at(handle).index())
    throw std::invalid_argument("Composite::set_block: block kind change is not allowed");
  if (liekit::block_dof(value) != liekit::block_dof(blocks_[handle]))
    throw std::invalid_argument("Composite::set_block: block DoF change is not allowed");
  blocks_[handle] = std::move(value);
}

Composite Composite::identity() const {
  Composite out;
  for (const auto& b : blocks_) out.add(block_identity(b));
  return out;
}

Composite Composite::dinverse() const {
  Composite out;
  for (const auto& b : blocks_) out.add(block_inverse(b));
  return out;
}

Composite Composite::dcompose(const Composite& other) const {
  check_layout(other);
  Composite out;
  for (int i = 0; i < num_blocks(); ++i) out.add(block_compose(blocks_[i], other.blocks_[i]));
  return out;
}

VecX Composite::dlog() const {
  VecX tau(dof_);
  for (int i = 0; i < num_blocks(); ++i)
    tau.segment(offsets_[i], block_dof(i)) = block_rminus(blocks_[i], block_identity(blocks_[i]));
  return tau;
}

Composite Composite::dplus(const Eigen::Ref<const VecX>& tau) const {
  if (tau.size() != dof_) throw std::invalid_argument("Composite::dplus: tangent layout mismatch");
  Composite out;
  for (int i = 0; i < num_blocks(); ++i)
    out.add(block_rplus(blocks_[i], tau.segment(offsets_[i], block_dof(i))));
  return out;
}

VecX Composite::dminus(const Composite& x) const {
  check_layout(x);
  VecX tau(dof_);
  for (int i = 0; i < num_blocks(); ++i)
    tau.segment(offsets_[i], block_dof(i)) = block_rminus(blocks_[i], x.blocks_[i]);
  return tau;
}

void Composite::check_layout(const Composite& other) const {
  if (other.num_blocks() != num_blocks() || other.dof_ != dof_)
    throw std::invalid_argument("Composite: layout mismatch");
  for (int i = 0; i < num_blocks(); ++i)
    if (blocks_[i].index() != other.blocks_[i].index())
      throw std::invalid_argument("Composite: block kind mismatch");
}

}  // namespace liekit
