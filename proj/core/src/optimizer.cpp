#include "ssan/optimizer.hpp"

#include <cmath>

#include "ssan/error.hpp"

namespace ssan {

AdamMoments& Adam::moments_for(const Parameter& p) {
  for (auto& m : state_.moments)
    if (m.name == p.name) {
      if (m.first.size() != p.tensor.size())
        throw Error("optimizer state for '" + p.name + "' has " +
                    std::to_string(m.first.size()) + " entries, parameter has " +
                    std::to_string(p.tensor.size()));
      return m;
    }
  state_.moments.push_back(AdamMoments{p.name,
                                       std::vector<double>(p.tensor.size(), 0.0),
                                       std::vector<double>(p.tensor.size(), 0.0)});
  return state_.moments.back();
}

void Adam::step(std::vector<Parameter>& params) {
  for (const auto& p : params)
    if (p.trainable && !p.tensor.has_grad())
      throw Error("adam: trainable parameter '" + p.name + "' has no gradient");

  ++state_.step;
  const double t = static_cast<double>(state_.step);
  const double correction1 = 1.0 - std::pow(config_.beta1, t);
  const double correction2 = 1.0 - std::pow(config_.beta2, t);

  for (auto& p : params) {
    if (!p.trainable) continue;
    auto& m = moments_for(p);
    auto values = p.tensor.mutable_values();
    const auto grad = p.tensor.grad();
    for (std::size_t i = 0; i < values.size(); ++i) {
      m.first[i] = config_.beta1 * m.first[i] + (1.0 - config_.beta1) * grad[i];
      m.second[i] =
          config_.beta2 * m.second[i] + (1.0 - config_.beta2) * grad[i] * grad[i];
      const double m_hat = m.first[i] / correction1;
      const double v_hat = m.second[i] / correction2;
      values[i] -= config_.lr * m_hat / (std::sqrt(v_hat) + config_.eps);
    }
  }
}

}  // namespace ssan
