#include "ssan/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ssan/error.hpp"

namespace ssan::ops {

namespace {

using detail::Node;

[[noreturn]] void mismatch(const char* op, const Tensor& a, const Tensor& b) {
  throw ShapeError(std::string(op) + ": incompatible shapes " +
                   shape_string(a.shape()) + " and " + shape_string(b.shape()));
}

void require_matrix(const char* op, const Tensor& a) {
  if (a.rank() != 2)
    throw ShapeError(std::string(op) + ": expected a matrix, got shape " +
                     shape_string(a.shape()));
}

Node& input(Node& self, std::size_t k) { return *self.inputs[k]; }

// c[n x m] += a[n x k] * b[k x m]
void gemm_nn(const double* a, const double* b, double* c, std::size_t n,
             std::size_t k, std::size_t m) {
  for (std::size_t i = 0; i < n; ++i) {
    double* crow = c + i * m;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = a[i * k + p];
      const double* brow = b + p * m;
      for (std::size_t j = 0; j < m; ++j) crow[j] += av * brow[j];
    }
  }
}

// c[n x k] += g[n x m] * b[k x m]^T
void gemm_nt(const double* g, const double* b, double* c, std::size_t n,
             std::size_t m, std::size_t k) {
  for (std::size_t i = 0; i < n; ++i) {
    const double* grow = g + i * m;
    for (std::size_t p = 0; p < k; ++p) {
      const double* brow = b + p * m;
      double acc = 0.0;
      for (std::size_t j = 0; j < m; ++j) acc += grow[j] * brow[j];
      c[i * k + p] += acc;
    }
  }
}

// c[k x m] += a[n x k]^T * g[n x m]
void gemm_tn(const double* a, const double* g, double* c, std::size_t n,
             std::size_t k, std::size_t m) {
  for (std::size_t i = 0; i < n; ++i) {
    const double* grow = g + i * m;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = a[i * k + p];
      double* crow = c + p * m;
      for (std::size_t j = 0; j < m; ++j) crow[j] += av * grow[j];
    }
  }
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_matrix("matmul", a);
  require_matrix("matmul", b);
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  if (b.rows() != k) mismatch("matmul", a, b);
  std::vector<double> out(n * m, 0.0);
  gemm_nn(a.values().data(), b.values().data(), out.data(), n, k, m);
  return Tensor::make_result({n, m}, std::move(out), "matmul", {a, b},
                             [n, k, m](Node& self) {
                               Node& x = input(self, 0);
                               Node& y = input(self, 1);
                               if (x.requires_grad)
                                 gemm_nt(self.grad.data(), y.value.data(),
                                         x.grad.data(), n, m, k);
                               if (y.requires_grad)
                                 gemm_tn(x.value.data(), self.grad.data(),
                                         y.grad.data(), n, k, m);
                             });
}

Tensor transpose(const Tensor& a) {
  require_matrix("transpose", a);
  const std::size_t n = a.rows(), m = a.cols();
  std::vector<double> out(n * m);
  const auto v = a.values();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) out[j * n + i] = v[i * m + j];
  return Tensor::make_result({m, n}, std::move(out), "transpose", {a},
                             [n, m](Node& self) {
                               Node& x = input(self, 0);
                               for (std::size_t i = 0; i < n; ++i)
                                 for (std::size_t j = 0; j < m; ++j)
                                   x.grad[i * m + j] += self.grad[j * n + i];
                             });
}

Tensor add(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) mismatch("add", a, b);
  std::vector<double> out(a.values().begin(), a.values().end());
  const auto bv = b.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
  return Tensor::make_result(a.shape(), std::move(out), "add", {a, b},
                             [](Node& self) {
                               for (std::size_t k = 0; k < 2; ++k) {
                                 Node& x = input(self, k);
                                 if (!x.requires_grad) continue;
                                 for (std::size_t i = 0; i < self.grad.size(); ++i)
                                   x.grad[i] += self.grad[i];
                               }
                             });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) mismatch("sub", a, b);
  std::vector<double> out(a.values().begin(), a.values().end());
  const auto bv = b.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= bv[i];
  return Tensor::make_result(a.shape(), std::move(out), "sub", {a, b},
                             [](Node& self) {
                               Node& x = input(self, 0);
                               Node& y = input(self, 1);
                               for (std::size_t i = 0; i < self.grad.size(); ++i) {
                                 if (x.requires_grad) x.grad[i] += self.grad[i];
                                 if (y.requires_grad) y.grad[i] -= self.grad[i];
                               }
                             });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) mismatch("mul", a, b);
  std::vector<double> out(a.values().begin(), a.values().end());
  const auto bv = b.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= bv[i];
  return Tensor::make_result(a.shape(), std::move(out), "mul", {a, b},
                             [](Node& self) {
                               Node& x = input(self, 0);
                               Node& y = input(self, 1);
                               for (std::size_t i = 0; i < self.grad.size(); ++i) {
                                 if (x.requires_grad)
                                   x.grad[i] += self.grad[i] * y.value[i];
                                 if (y.requires_grad)
                                   y.grad[i] += self.grad[i] * x.value[i];
                               }
                             });
}

Tensor add_row(const Tensor& a, const Tensor& row) {
  require_matrix("add_row", a);
  const std::size_t n = a.rows(), m = a.cols();
  if (row.size() != m) mismatch("add_row", a, row);
  std::vector<double> out(a.values().begin(), a.values().end());
  const auto r = row.values();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) out[i * m + j] += r[j];
  return Tensor::make_result(a.shape(), std::move(out), "add_row", {a, row},
                             [n, m](Node& self) {
                               Node& x = input(self, 0);
                               Node& r = input(self, 1);
                               if (x.requires_grad)
                                 for (std::size_t i = 0; i < n * m; ++i)
                                   x.grad[i] += self.grad[i];
                               if (r.requires_grad)
                                 for (std::size_t i = 0; i < n; ++i)
                                   for (std::size_t j = 0; j < m; ++j)
                                     r.grad[j] += self.grad[i * m + j];
                             });
}

Tensor add_outer(const Tensor& col, const Tensor& row) {
  require_matrix("add_outer", col);
  require_matrix("add_outer", row);
  if (col.cols() != 1 || row.rows() != 1) mismatch("add_outer", col, row);
  const std::size_t n = col.rows(), m = row.cols();
  std::vector<double> out(n * m);
  const auto c = col.values();
  const auto r = row.values();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) out[i * m + j] = c[i] + r[j];
  return Tensor::make_result({n, m}, std::move(out), "add_outer", {col, row},
                             [n, m](Node& self) {
                               Node& c = input(self, 0);
                               Node& r = input(self, 1);
                               for (std::size_t i = 0; i < n; ++i)
                                 for (std::size_t j = 0; j < m; ++j) {
                                   const double g = self.grad[i * m + j];
                                   if (c.requires_grad) c.grad[i] += g;
                                   if (r.requires_grad) r.grad[j] += g;
                                 }
                             });
}

Tensor scale(const Tensor& a, double factor) {
  std::vector<double> out(a.values().begin(), a.values().end());
  for (auto& v : out) v *= factor;
  return Tensor::make_result(a.shape(), std::move(out), "scale", {a},
                             [factor](Node& self) {
                               Node& x = input(self, 0);
                               for (std::size_t i = 0; i < self.grad.size(); ++i)
                                 x.grad[i] += self.grad[i] * factor;
                             });
}

Tensor scale_by(const Tensor& a, const Tensor& factor) {
  if (factor.size() != 1) mismatch("scale_by", a, factor);
  const double f = factor.values()[0];
  std::vector<double> out(a.values().begin(), a.values().end());
  for (auto& v : out) v *= f;
  return Tensor::make_result(a.shape(), std::move(out), "scale_by", {a, factor},
                             [](Node& self) {
                               Node& x = input(self, 0);
                               Node& f = input(self, 1);
                               if (x.requires_grad)
                                 for (std::size_t i = 0; i < self.grad.size(); ++i)
                                   x.grad[i] += self.grad[i] * f.value[0];
                               if (f.requires_grad) {
                                 double acc = 0.0;
                                 for (std::size_t i = 0; i < self.grad.size(); ++i)
                                   acc += self.grad[i] * x.value[i];
                                 f.grad[0] += acc;
                               }
                             });
}

Tensor mul_constant(const Tensor& a, std::span<const double> constant) {
  if (constant.size() != a.size())
    throw ShapeError("mul_constant: " + std::to_string(constant.size()) +
                     " constants for shape " + shape_string(a.shape()));
  std::vector<double> c(constant.begin(), constant.end());
  std::vector<double> out(a.values().begin(), a.values().end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= c[i];
  return Tensor::make_result(a.shape(), std::move(out), "mul_constant", {a},
                             [c = std::move(c)](Node& self) {
                               Node& x = input(self, 0);
                               for (std::size_t i = 0; i < self.grad.size(); ++i)
                                 x.grad[i] += self.grad[i] * c[i];
                             });
}

Tensor concat_cols(std::span<const Tensor> parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no inputs");
  for (const auto& p : parts) require_matrix("concat_cols", p);
  const std::size_t n = parts[0].rows();
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  for (const auto& p : parts) {
    if (p.rows() != n) mismatch("concat_cols", parts[0], p);
    widths.push_back(p.cols());
    total += p.cols();
  }
  std::vector<double> out(n * total);
  std::size_t offset = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const auto v = parts[k].values();
    for (std::size_t i = 0; i < n; ++i)
      std::copy_n(v.data() + i * widths[k], widths[k],
                  out.data() + i * total + offset);
    offset += widths[k];
  }
  return Tensor::make_result(
      {n, total}, std::move(out), "concat_cols",
      std::vector<Tensor>(parts.begin(), parts.end()),
      [n, total, widths = std::move(widths)](Node& self) {
        std::size_t offset = 0;
        for (std::size_t k = 0; k < widths.size(); ++k) {
          Node& x = input(self, k);
          if (x.requires_grad)
            for (std::size_t i = 0; i < n; ++i)
              for (std::size_t j = 0; j < widths[k]; ++j)
                x.grad[i * widths[k] + j] += self.grad[i * total + offset + j];
          offset += widths[k];
        }
      });
}

Tensor concat_rows(std::span<const Tensor> parts) {
  if (parts.empty()) throw ShapeError("concat_rows: no inputs");
  for (const auto& p : parts) require_matrix("concat_rows", p);
  const std::size_t m = parts[0].cols();
  std::vector<std::size_t> sizes;
  std::vector<double> out;
  std::size_t rows = 0;
  for (const auto& p : parts) {
    if (p.cols() != m) mismatch("concat_rows", parts[0], p);
    out.insert(out.end(), p.values().begin(), p.values().end());
    sizes.push_back(p.size());
    rows += p.rows();
  }
  return Tensor::make_result({rows, m}, std::move(out), "concat_rows",
                             std::vector<Tensor>(parts.begin(), parts.end()),
                             [sizes = std::move(sizes)](Node& self) {
                               std::size_t offset = 0;
                               for (std::size_t k = 0; k < sizes.size(); ++k) {
                                 Node& x = input(self, k);
                                 if (x.requires_grad)
                                   for (std::size_t i = 0; i < sizes[k]; ++i)
                                     x.grad[i] += self.grad[offset + i];
                                 offset += sizes[k];
                               }
                             });
}

Tensor softmax_rows(const Tensor& a) {
  require_matrix("softmax_rows", a);
  const std::size_t n = a.rows(), m = a.cols();
  std::vector<double> out(n * m);
  const auto v = a.values();
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = v.data() + i * m;
    double* o = out.data() + i * m;
    const double mx = *std::max_element(row, row + m);
    double total = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      o[j] = std::exp(row[j] - mx);
      total += o[j];
    }
    for (std::size_t j = 0; j < m; ++j) o[j] /= total;
  }
  return Tensor::make_result(a.shape(), std::move(out), "softmax_rows", {a},
                             [n, m](Node& self) {
                               Node& x = input(self, 0);
                               for (std::size_t i = 0; i < n; ++i) {
                                 const double* y = self.value.data() + i * m;
                                 const double* g = self.grad.data() + i * m;
                                 double dot = 0.0;
                                 for (std::size_t j = 0; j < m; ++j)
                                   dot += g[j] * y[j];
                                 for (std::size_t j = 0; j < m; ++j)
                                   x.grad[i * m + j] += y[j] * (g[j] - dot);
                               }
                             });
}

Tensor sigmoid(const Tensor& a) {
  std::vector<double> out(a.values().begin(), a.values().end());
  for (auto& v : out) {
    if (v >= 0) {
      v = 1.0 / (1.0 + std::exp(-v));
    } else {
      const double e = std::exp(v);
      v = e / (1.0 + e);
    }
  }
  return Tensor::make_result(a.shape(), std::move(out), "sigmoid", {a},
                             [](Node& self) {
                               Node& x = input(self, 0);
                               for (std::size_t i = 0; i < self.grad.size(); ++i) {
                                 const double y = self.value[i];
                                 x.grad[i] += self.grad[i] * y * (1.0 - y);
                               }
                             });
}

Tensor relu(const Tensor& a) {
  std::vector<double> out(a.values().begin(), a.values().end());
  for (auto& v : out) v = v > 0.0 ? v : 0.0;
  return Tensor::make_result(a.shape(), std::move(out), "relu", {a},
                             [](Node& self) {
                               Node& x = input(self, 0);
                               for (std::size_t i = 0; i < self.grad.size(); ++i)
                                 if (x.value[i] > 0.0) x.grad[i] += self.grad[i];
                             });
}

Tensor sum_axis(const Tensor& a, std::size_t axis) {
  require_matrix("sum_axis", a);
  const std::size_t n = a.rows(), m = a.cols();
  if (axis > 1) throw ShapeError("sum_axis: axis must be 0 or 1");
  const auto v = a.values();
  if (axis == 0) {
    std::vector<double> out(m, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < m; ++j) out[j] += v[i * m + j];
    return Tensor::make_result({1, m}, std::move(out), "sum_axis0", {a},
                               [n, m](Node& self) {
                                 Node& x = input(self, 0);
                                 for (std::size_t i = 0; i < n; ++i)
                                   for (std::size_t j = 0; j < m; ++j)
                                     x.grad[i * m + j] += self.grad[j];
                               });
  }
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) out[i] += v[i * m + j];
  return Tensor::make_result({n, 1}, std::move(out), "sum_axis1", {a},
                             [n, m](Node& self) {
                               Node& x = input(self, 0);
                               for (std::size_t i = 0; i < n; ++i)
                                 for (std::size_t j = 0; j < m; ++j)
                                   x.grad[i * m + j] += self.grad[i];
                             });
}

Tensor mean_axis(const Tensor& a, std::size_t axis) {
  require_matrix("mean_axis", a);
  const std::size_t count = axis == 0 ? a.rows() : a.cols();
  if (count == 0) throw ShapeError("mean_axis: empty axis in shape " +
                                   shape_string(a.shape()));
  return scale(sum_axis(a, axis), 1.0 / static_cast<double>(count));
}

Tensor sum(const Tensor& a) {
  double total = 0.0;
  for (double v : a.values()) total += v;
  return Tensor::make_result({}, {total}, "sum", {a}, [](Node& self) {
    Node& x = input(self, 0);
    for (auto& g : x.grad) g += self.grad[0];
  });
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias,
                  double eps) {
  require_matrix("layer_norm", x);
  const std::size_t n = x.rows(), m = x.cols();
  if (gain.size() != m) mismatch("layer_norm", x, gain);
  if (bias.size() != m) mismatch("layer_norm", x, bias);
  std::vector<double> out(n * m), xhat(n * m), inv_std(n);
  const auto v = x.values();
  const auto g = gain.values();
  const auto b = bias.values();
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = v.data() + i * m;
    double mean = 0.0;
    for (std::size_t j = 0; j < m; ++j) mean += row[j];
    mean /= static_cast<double>(m);
    double var = 0.0;
    for (std::size_t j = 0; j < m; ++j) var += (row[j] - mean) * (row[j] - mean);
    var /= static_cast<double>(m);
    inv_std[i] = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < m; ++j) {
      xhat[i * m + j] = (row[j] - mean) * inv_std[i];
      out[i * m + j] = xhat[i * m + j] * g[j] + b[j];
    }
  }
  return Tensor::make_result(
      x.shape(), std::move(out), "layer_norm", {x, gain, bias},
      [n, m, xhat = std::move(xhat), inv_std = std::move(inv_std)](Node& self) {
        Node& xn = input(self, 0);
        Node& gn = input(self, 1);
        Node& bn = input(self, 2);
        const double inv_m = 1.0 / static_cast<double>(m);
        for (std::size_t i = 0; i < n; ++i) {
          const double* dy = self.grad.data() + i * m;
          const double* xh = xhat.data() + i * m;
          if (gn.requires_grad)
            for (std::size_t j = 0; j < m; ++j) gn.grad[j] += dy[j] * xh[j];
          if (bn.requires_grad)
            for (std::size_t j = 0; j < m; ++j) bn.grad[j] += dy[j];
          if (xn.requires_grad) {
            double sum_dxh = 0.0, sum_dxh_xh = 0.0;
            for (std::size_t j = 0; j < m; ++j) {
              const double dxh = dy[j] * gn.value[j];
              sum_dxh += dxh;
              sum_dxh_xh += dxh * xh[j];
            }
            for (std::size_t j = 0; j < m; ++j) {
              const double dxh = dy[j] * gn.value[j];
              xn.grad[i * m + j] +=
                  inv_std[i] * (dxh - inv_m * sum_dxh - xh[j] * inv_m * sum_dxh_xh);
            }
          }
        }
      });
}

Tensor gather_rows(const Tensor& table, std::span<const std::size_t> indices) {
  require_matrix("gather_rows", table);
  const std::size_t rows = table.rows(), m = table.cols();
  std::vector<std::size_t> idx(indices.begin(), indices.end());
  std::vector<double> out(idx.size() * m);
  const auto v = table.values();
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] >= rows)
      throw ShapeError("gather_rows: index " + std::to_string(idx[i]) +
                       " out of range for shape " + shape_string(table.shape()));
    std::copy_n(v.data() + idx[i] * m, m, out.data() + i * m);
  }
  const std::size_t count = idx.size();
  return Tensor::make_result({count, m}, std::move(out), "gather_rows", {table},
                             [m, idx = std::move(idx)](Node& self) {
                               Node& t = input(self, 0);
                               for (std::size_t i = 0; i < idx.size(); ++i)
                                 for (std::size_t j = 0; j < m; ++j)
                                   t.grad[idx[i] * m + j] += self.grad[i * m + j];
                             });
}

Tensor masked_fill(const Tensor& a, std::span<const std::uint8_t> mask,
                   double value) {
  if (mask.size() != a.size())
    throw ShapeError("masked_fill: mask of " + std::to_string(mask.size()) +
                     " cells for shape " + shape_string(a.shape()));
  std::vector<std::uint8_t> keep(mask.begin(), mask.end());
  std::vector<double> out(a.values().begin(), a.values().end());
  for (std::size_t i = 0; i < out.size(); ++i)
    if (keep[i]) out[i] = value;
  return Tensor::make_result(a.shape(), std::move(out), "masked_fill", {a},
                             [keep = std::move(keep)](Node& self) {
                               Node& x = input(self, 0);
                               for (std::size_t i = 0; i < self.grad.size(); ++i)
                                 if (!keep[i]) x.grad[i] += self.grad[i];
                             });
}

Tensor binary_cross_entropy(const Tensor& probs,
                            std::span<const double> targets, double clip) {
  if (targets.size() != probs.size())
    throw ShapeError("binary_cross_entropy: " + std::to_string(targets.size()) +
                     " targets for shape " + shape_string(probs.shape()));
  std::vector<double> y(targets.begin(), targets.end());
  const auto p = probs.values();
  double loss = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double q = std::clamp(p[i], clip, 1.0 - clip);
    loss -= y[i] * std::log(q) + (1.0 - y[i]) * std::log(1.0 - q);
  }
  return Tensor::make_result(
      {}, {loss}, "binary_cross_entropy", {probs},
      [y = std::move(y), clip](Node& self) {
        Node& x = input(self, 0);
        const double g = self.grad[0];
        for (std::size_t i = 0; i < y.size(); ++i) {
          const double q = x.value[i];
          if (q < clip || q > 1.0 - clip) continue;
          x.grad[i] += g * (-y[i] / q + (1.0 - y[i]) / (1.0 - q));
        }
      });
}

}  // namespace ssan::ops
