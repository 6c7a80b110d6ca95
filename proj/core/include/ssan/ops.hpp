#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ssan/tensor.hpp"

// Differentiable primitives. Matrices are rank-2 and row-major; "row vectors"
// are 1 x d matrices. Every op throws ShapeError naming itself and the shapes
// involved when its inputs are incompatible.
namespace ssan::ops {

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
/// Adds a 1 x d (or d-element) row to every row of an n x d matrix.
Tensor add_row(const Tensor& a, const Tensor& row);
/// out[i][j] = col[i] + row[j] for an n x 1 column and a 1 x m row.
Tensor add_outer(const Tensor& col, const Tensor& row);
Tensor scale(const Tensor& a, double factor);
/// Multiplies every element by a one-element tensor.
Tensor scale_by(const Tensor& a, const Tensor& factor);
/// Elementwise product with a constant (non-differentiable) array.
Tensor mul_constant(const Tensor& a, std::span<const double> constant);

Tensor concat_cols(std::span<const Tensor> parts);
Tensor concat_rows(std::span<const Tensor> parts);

Tensor softmax_rows(const Tensor& a);
Tensor sigmoid(const Tensor& a);
Tensor relu(const Tensor& a);

/// axis 0: mean of rows (1 x d); axis 1: mean of columns (n x 1).
Tensor mean_axis(const Tensor& a, std::size_t axis);
/// axis 0: 1 x d; axis 1: n x 1.
Tensor sum_axis(const Tensor& a, std::size_t axis);
Tensor sum(const Tensor& a);

/// Per-row normalization with learned gain and bias (both 1 x d).
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias,
                  double eps);

/// Rows of `table` selected by `indices` (embedding lookup / gather).
Tensor gather_rows(const Tensor& table, std::span<const std::size_t> indices);
inline Tensor embedding_lookup(const Tensor& table,
                               std::span<const std::size_t> indices) {
  return gather_rows(table, indices);
}

/// Cells with a non-zero mask byte take `value`; they pass no gradient.
Tensor masked_fill(const Tensor& a, std::span<const std::uint8_t> mask,
                   double value);

/// Sum over elements of the binary cross-entropy between `probs` and 0/1
/// `targets`; probabilities are clipped to [clip, 1 - clip].
Tensor binary_cross_entropy(const Tensor& probs,
                            std::span<const double> targets,
                            double clip = 1e-7);

}  // namespace ssan::ops
