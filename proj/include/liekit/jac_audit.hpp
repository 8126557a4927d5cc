#pragma once

// Conformance audit of every analytic Jacobian block against the central
// finite-difference oracle, over seeded random inputs bounded away from
// the singularities (rotation magnitudes stay below pi, turn rates above
// the straight-line threshold unless a block targets that branch).

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "liekit/types.hpp"

namespace liekit {

struct JacCheckResult {
  std::string name;
  double max_rel_err = 0.0;
  bool pass = false;
};

struct JacAuditReport {
  uint64_t seed = 0;
  int trials = 0;
  double tolerance = 0.0;
  std::vector<JacCheckResult> results;
  bool all_pass = false;
};

/// Test hook: applied to each analytic block before comparison, keyed by
/// block name. Lets a fault-injection test flip one block's sign and watch
/// exactly that block fail.
using JacMutator = std::function<void(const std::string& name, Eigen::MatrixXd& analytic)>;

JacAuditReport run_jacobian_audit(uint64_t seed, int trials = 100, double tolerance = 1e-5,
                                  const JacMutator& mutate = nullptr);

}  // namespace liekit
