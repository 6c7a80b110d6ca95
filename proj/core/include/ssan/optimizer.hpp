#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ssan/parameter.hpp"

namespace ssan {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// First/second moment estimates for one named parameter.
struct AdamMoments {
  std::string name;
  std::vector<double> first;
  std::vector<double> second;
};

struct AdamState {
  std::uint64_t step = 0;
  std::vector<AdamMoments> moments;
};

/// Adam with bias-corrected moments. Moments are keyed by parameter name and
/// persist between steps (and through checkpoints).
class Adam {
 public:
  explicit Adam(AdamConfig config = {}) : config_(config) {}

  /// Updates every trainable parameter in place. Throws Error if a trainable
  /// parameter has no gradient storage.
  void step(std::vector<Parameter>& params);

  const AdamConfig& config() const noexcept { return config_; }
  const AdamState& state() const noexcept { return state_; }
  void restore(AdamState state) { state_ = std::move(state); }

 private:
  AdamMoments& moments_for(const Parameter& p);

  AdamConfig config_;
  AdamState state_;
};

}  // namespace ssan
