#include "ssan/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ssan/random.hpp"

namespace ssan {

GradCheckResult grad_check(const std::function<Tensor()>& loss_fn,
                           std::vector<Parameter*> params,
                           const GradCheckOptions& options) {
  for (auto* p : params) p->tensor.zero_grad();
  loss_fn().backward();

  std::vector<std::vector<double>> analytic;
  analytic.reserve(params.size());
  for (auto* p : params)
    analytic.emplace_back(p->tensor.grad().begin(), p->tensor.grad().end());

  GradCheckResult result;
  Rng rng(options.seed);
  NoGradGuard no_grad;
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto values = params[k]->tensor.mutable_values();
    std::vector<std::size_t> entries(values.size());
    std::iota(entries.begin(), entries.end(), 0);
    if (options.max_entries_per_param > 0 &&
        entries.size() > options.max_entries_per_param) {
      rng.shuffle(entries);
      entries.resize(options.max_entries_per_param);
      std::sort(entries.begin(), entries.end());
    }
    for (auto i : entries) {
      const double original = values[i];
      values[i] = original + options.step;
      const double up = loss_fn().item();
      values[i] = original - options.step;
      const double down = loss_fn().item();
      values[i] = original;

      const double numeric = (up - down) / (2.0 * options.step);
      const double a = analytic[k][i];
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
      const double err = std::abs(a - numeric) / denom;
      ++result.entries_checked;
      if (err > result.max_relative_error) {
        result.max_relative_error = err;
        result.worst_parameter = params[k]->name;
        result.worst_index = i;
        result.worst_analytic = a;
        result.worst_numeric = numeric;
      }
    }
  }
  return result;
}

}  // namespace ssan
