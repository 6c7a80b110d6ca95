#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "ssan/parameter.hpp"

namespace ssan {

struct GradCheckOptions {
  double step = 1e-6;
  /// 0 checks every element; otherwise a seeded sample per parameter.
  std::size_t max_entries_per_param = 0;
  std::uint64_t seed = 0;
};

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::string worst_parameter;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t entries_checked = 0;
};

/// Compares reverse-mode gradients of `loss_fn` against central differences.
/// Relative error per entry is |a - n| / max(|a|, |n|, 1e-8); the result holds
/// the maximum over all checked entries. `loss_fn` must rebuild the graph from
/// the current parameter values on every call.
GradCheckResult grad_check(const std::function<Tensor()>& loss_fn,
                           std::vector<Parameter*> params,
                           const GradCheckOptions& options = {});

}  // namespace ssan
