#include "ssan/parameter.hpp"

#include <cmath>

#include "ssan/error.hpp"

namespace ssan {

Tensor ParameterStore::add(std::string name, Tensor tensor, bool trainable) {
  if (find(name)) throw ConfigError("duplicate parameter name '" + name + "'");
  // Parameters are leaves; a fresh node keeps them out of any existing graph.
  Tensor leaf = Tensor::from(tensor.shape(),
                             std::vector<double>(tensor.values().begin(),
                                                 tensor.values().end()),
                             true);
  params_.push_back(Parameter{std::move(name), std::move(leaf), trainable});
  return params_.back().tensor;
}

const Parameter* ParameterStore::find(std::string_view name) const {
  for (const auto& p : params_)
    if (p.name == name) return &p;
  return nullptr;
}

Parameter* ParameterStore::find(std::string_view name) {
  for (auto& p : params_)
    if (p.name == name) return &p;
  return nullptr;
}

const Parameter& ParameterStore::get(std::string_view name) const {
  if (const auto* p = find(name)) return *p;
  throw ConfigError("no parameter named '" + std::string(name) + "'");
}

Parameter& ParameterStore::get(std::string_view name) {
  if (auto* p = find(name)) return *p;
  throw ConfigError("no parameter named '" + std::string(name) + "'");
}

std::size_t ParameterStore::scalar_count() const noexcept {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.tensor.size();
  return n;
}

void ParameterStore::zero_grad() {
  for (auto& p : params_) {
    if (p.trainable)
      p.tensor.zero_grad();
    else
      p.tensor.clear_grad();
  }
}

Tensor xavier_uniform(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double limit =
      std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::vector<double> values(fan_in * fan_out);
  for (auto& v : values) v = rng.uniform(-limit, limit);
  return Tensor::from({fan_in, fan_out}, std::move(values));
}

}  // namespace ssan
