#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace ssan {

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape) noexcept;
std::string shape_string(const Shape& shape);

namespace detail {

struct Node {
  Shape shape;
  std::vector<double> value;
  // Empty until a gradient is allocated.
  std::vector<double> grad;
  bool requires_grad = false;
  const char* op = "leaf";
  std::vector<std::shared_ptr<Node>> inputs;
  std::function<void(Node&)> backward;

  void ensure_grad() {
    if (grad.empty()) grad.assign(value.size(), 0.0);
  }
};

}  // namespace detail

/// Dense double-precision array that participates in a reverse-mode graph.
/// Copies share storage (handle semantics); graphs are freed when the last
/// handle to their output is dropped.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<double> values,
                     bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  bool defined() const noexcept { return node_ != nullptr; }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t size() const { return node_->value.size(); }
  /// Dimensions of a rank-2 tensor; throws ShapeError otherwise.
  std::size_t rows() const;
  std::size_t cols() const;

  std::span<const double> values() const { return node_->value; }
  std::span<double> mutable_values() { return node_->value; }
  double item() const;
  double at(std::size_t i, std::size_t j) const;

  bool requires_grad() const noexcept { return node_ && node_->requires_grad; }
  bool has_grad() const noexcept { return node_ && !node_->grad.empty(); }
  std::span<const double> grad() const { return node_->grad; }
  std::span<double> mutable_grad();
  /// Allocates (or resets) the gradient to zeros.
  void zero_grad();
  void clear_grad();

  /// Reverse-mode sweep from this scalar. Gradients accumulate into every
  /// reachable tensor that requires them.
  void backward() const;

  /// Same values, no graph history.
  Tensor detach() const;
  const char* op_name() const { return node_->op; }

  // Engine hooks for op implementations.
  static Tensor make_result(Shape shape, std::vector<double> values,
                            const char* op, std::vector<Tensor> inputs,
                            std::function<void(detail::Node&)> backward);
  detail::Node& node() const { return *node_; }
  bool same_storage(const Tensor& other) const noexcept {
    return node_ == other.node_;
  }

 private:
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}
  std::shared_ptr<detail::Node> node_;
};

/// While alive, ops on this thread record no graph (inference mode).
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_enabled() noexcept;

}  // namespace ssan
