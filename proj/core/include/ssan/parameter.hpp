#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "ssan/random.hpp"
#include "ssan/tensor.hpp"

namespace ssan {

struct Parameter {
  std::string name;
  Tensor tensor;
  bool trainable = true;
};

/// Ordered, name-unique collection of model parameters. Registration order is
/// the canonical order for checkpoints and optimizer state.
class ParameterStore {
 public:
  /// Registers a new leaf tensor; throws ConfigError on a duplicate name.
  Tensor add(std::string name, Tensor tensor, bool trainable = true);

  const Parameter* find(std::string_view name) const;
  Parameter* find(std::string_view name);
  const Parameter& get(std::string_view name) const;
  Parameter& get(std::string_view name);

  std::vector<Parameter>& all() noexcept { return params_; }
  const std::vector<Parameter>& all() const noexcept { return params_; }
  std::size_t size() const noexcept { return params_.size(); }
  std::size_t scalar_count() const noexcept;

  /// Allocates zeroed gradients on every trainable parameter.
  void zero_grad();

 private:
  std::vector<Parameter> params_;
};

/// Xavier/Glorot uniform init for a fan_in x fan_out matrix.
Tensor xavier_uniform(std::size_t fan_in, std::size_t fan_out, Rng& rng);

}  // namespace ssan
