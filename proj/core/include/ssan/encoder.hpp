#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ssan/parameter.hpp"
#include "ssan/structure.hpp"
#include "ssan/tensor.hpp"

namespace ssan {

enum class TransformationMode { None, Biaffine, Decomp };

std::string_view mode_name(TransformationMode mode) noexcept;
std::optional<TransformationMode> parse_mode(std::string_view name);

/// Which terms of the attentive bias are active.
///   query_conditioned: q_i . K_s     (decomposed)
///   key_conditioned:   Q_s . k_j     (decomposed)
///   prior:             b_s           (both modes)
///   biaffine_core:     q_i A_s k_j^T (biaffine)
struct BiasTerms {
  bool query_conditioned = false;
  bool key_conditioned = false;
  bool prior = false;
  bool biaffine_core = false;

  bool any() const noexcept {
    return query_conditioned || key_conditioned || prior || biaffine_core;
  }
  bool operator==(const BiasTerms&) const = default;
};

/// Comma list over {query, key, prior, biaffine}; "none" is empty.
BiasTerms parse_bias_terms(std::string_view text);
std::string format_bias_terms(const BiasTerms& terms);

struct Transformation {
  TransformationMode mode = TransformationMode::None;
  BiasTerms terms;

  /// Mode with its full term set: Biaffine {biaffine, prior},
  /// Decomp {query, key, prior}, None {}.
  static Transformation make(TransformationMode mode);
  /// Throws ConfigError when a term does not belong to the mode (None admits
  /// no terms).
  void validate() const;
  bool operator==(const Transformation&) const = default;
};

/// Half-open range of attention blocks that receive structural bias.
struct LayerRange {
  std::size_t begin = 0;
  std::size_t end = std::numeric_limits<std::size_t>::max();

  static LayerRange all() { return {}; }
  static LayerRange none() { return {0, 0}; }
  /// The top-k blocks of an L-block stack.
  static LayerRange top(std::size_t k, std::size_t layers);

  bool contains(std::size_t layer) const noexcept {
    return layer >= begin && layer < end;
  }
  /// Number of blocks in [0, layers) covered by the range.
  std::size_t count(std::size_t layers) const noexcept;
  bool operator==(const LayerRange&) const = default;
};

/// "all", "none", "top:K", or "A-B" (half-open).
LayerRange parse_layer_range(std::string_view text, std::size_t layers);
std::string format_layer_range(const LayerRange& range);

struct EncoderConfig {
  std::size_t layers = 2;
  std::size_t heads = 2;
  std::size_t d_model = 32;
  std::size_t ffn_multiplier = 4;
  Transformation transform = Transformation::make(TransformationMode::Biaffine);
  LayerRange structured_layers = LayerRange::all();
  double layer_norm_eps = 1e-5;

  std::size_t head_dim() const noexcept { return d_model / heads; }
  /// Throws ConfigError: d_model not divisible by heads, zero sizes, or a
  /// structured range outside [0, layers).
  void validate() const;
};

/// Transformation parameters for one (layer, head, dependency). Tensors not
/// used by the mode stay undefined.
struct DependencyTransform {
  Tensor core;       // A_s, d x d
  Tensor query_vec;  // Q_s, 1 x d (paired with keys)
  Tensor key_vec;    // K_s, 1 x d (paired with queries)
  Tensor prior;      // b_s, scalar
};

struct AttentionHead {
  Tensor wq, wk, wv;  // d_model x head_dim
  std::array<DependencyTransform, kDependencyCount> transforms;

  const DependencyTransform& transform(DependencyType s) const {
    return transforms[index_of(s)];
  }
};

struct EncoderLayer {
  std::vector<AttentionHead> heads;
  Tensor wo, bo;
  Tensor ln1_gain, ln1_bias;
  Tensor ffn_in, ffn_in_bias, ffn_out, ffn_out_bias;
  Tensor ln2_gain, ln2_bias;
  bool structured = false;
};

struct QKV {
  Tensor q, k, v;
};

/// Per-type 0/1 cell masks for a structure matrix, shared by every head.
struct StructureMasks {
  std::size_t n = 0;
  std::array<std::vector<double>, kDependencyCount> masks;
  std::array<bool, kDependencyCount> present{};

  static StructureMasks from(const StructureMatrix& s);
};

/// q = x Wq, k = x Wk, v = x Wv (no projection biases).
QKV project_qkv(const Tensor& x, const AttentionHead& head);

/// e = q k^T / sqrt(d).
Tensor raw_scores(const Tensor& q, const Tensor& k);

/// q A k^T + b for single vectors.
double biaffine_bias(std::span<const double> q, std::span<const double> k,
                     const DependencyTransform& t, const BiasTerms& terms);
/// q . K + Q . k + b with disabled terms contributing zero.
double decomp_bias(std::span<const double> q, std::span<const double> k,
                   const DependencyTransform& t, const BiasTerms& terms);

/// n x n matrix of transformation outputs, zero on NA cells. Undefined when
/// the transformation is None or no structured cell is present.
Tensor structured_bias(const Tensor& q, const Tensor& k,
                       const StructureMasks& masks, const AttentionHead& head,
                       const Transformation& transform);

/// (q k^T + bias) / sqrt(d); padded key columns (non-zero `key_padding`
/// entries) are set to -inf.
Tensor structured_scores(const Tensor& q, const Tensor& k, const Tensor& bias,
                         std::span<const std::uint8_t> key_padding = {});

/// z = softmax_rows(scores) v.
Tensor attend(const Tensor& scores, const Tensor& v);

struct BiasRecord {
  std::size_t layer = 0;
  std::size_t head = 0;
  DependencyType dependency = DependencyType::NA;
  double mean_bias = 0.0;
  std::size_t count = 0;
};

/// Accumulates transformation outputs per (layer, head, dependency).
class BiasRecorder {
 public:
  void add(std::size_t layer, std::size_t head, DependencyType dep,
           double value);
  void merge(const BiasRecorder& other);
  /// Non-empty cells in (layer, head, dependency) order; NA never appears.
  std::vector<BiasRecord> records() const;

 private:
  struct Sum {
    double total = 0.0;
    std::size_t count = 0;
  };
  std::map<std::array<std::size_t, 3>, Sum> sums_;
};

/// Stack of post-norm structured self-attention blocks.
class Encoder {
 public:
  /// Registers parameters under "encoder.*" in `store`.
  Encoder(EncoderConfig config, ParameterStore& store, Rng& rng);

  const EncoderConfig& config() const noexcept { return config_; }
  const std::vector<EncoderLayer>& layers() const noexcept { return layers_; }

  double biaffine_bias(std::span<const double> q, std::span<const double> k,
                       DependencyType s, std::size_t layer,
                       std::size_t head) const;
  double decomp_bias(std::span<const double> q, std::span<const double> k,
                     DependencyType s, std::size_t layer,
                     std::size_t head) const;

  /// x: n x d_model. `key_padding` marks padded positions (empty = none).
  /// When `recorder` is given, per-cell biases of structured layers are
  /// accumulated over non-padded cells.
  Tensor forward(const Tensor& x, const StructureMatrix& structure,
                 std::span<const std::uint8_t> key_padding = {},
                 BiasRecorder* recorder = nullptr) const;

  /// Scores of one block/head before softmax; exposed for analysis and tests.
  Tensor layer_scores(const Tensor& x, const StructureMasks& masks,
                      std::size_t layer, std::size_t head,
                      std::span<const std::uint8_t> key_padding = {}) const;

 private:
  const DependencyTransform& checked_transform(DependencyType s,
                                               std::size_t layer,
                                               std::size_t head) const;

  EncoderConfig config_;
  std::vector<EncoderLayer> layers_;
};

/// Grid of mean bias per (layer, dependency), averaged over heads and cells.
struct BiasHeatmap {
  struct Cell {
    double mean_bias = 0.0;
    std::size_t count = 0;
  };
  std::size_t layers = 0;
  std::vector<std::array<Cell, kDependencyCount>> cells;
};

/// Count-weighted aggregation over heads. Throws Error on empty `records`.
BiasHeatmap export_bias_heatmap(std::span<const BiasRecord> records,
                                std::size_t layers);
/// Tab-separated rows "layer  dependency  mean_bias  count" with a header,
/// one row per (layer, dependency) including NA.
void write_bias_heatmap(std::ostream& out, const BiasHeatmap& heatmap);

}  // namespace ssan
