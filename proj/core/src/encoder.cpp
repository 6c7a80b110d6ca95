#include "ssan/encoder.hpp"

#include <cmath>
#include <limits>

#include "ssan/error.hpp"
#include "ssan/ops.hpp"

namespace ssan {

std::string_view mode_name(TransformationMode mode) noexcept {
  switch (mode) {
    case TransformationMode::None: return "none";
    case TransformationMode::Biaffine: return "biaffine";
    case TransformationMode::Decomp: return "decomp";
  }
  return "?";
}

std::optional<TransformationMode> parse_mode(std::string_view name) {
  for (auto m : {TransformationMode::None, TransformationMode::Biaffine,
                 TransformationMode::Decomp})
    if (name == mode_name(m)) return m;
  return std::nullopt;
}

BiasTerms parse_bias_terms(std::string_view text) {
  BiasTerms terms;
  if (text.empty() || text == "none") return terms;
  std::size_t at = 0;
  while (true) {
    const auto comma = text.find(',', at);
    const auto item = text.substr(at, comma == std::string_view::npos
                                          ? std::string_view::npos
                                          : comma - at);
    if (item == "query")
      terms.query_conditioned = true;
    else if (item == "key")
      terms.key_conditioned = true;
    else if (item == "prior")
      terms.prior = true;
    else if (item == "biaffine")
      terms.biaffine_core = true;
    else
      throw ConfigError("unknown bias term '" + std::string(item) +
                        "' (expected query, key, prior, biaffine)");
    if (comma == std::string_view::npos) break;
    at = comma + 1;
  }
  return terms;
}

std::string format_bias_terms(const BiasTerms& terms) {
  std::string out;
  auto append = [&out](bool on, const char* name) {
    if (!on) return;
    if (!out.empty()) out += ',';
    out += name;
  };
  append(terms.query_conditioned, "query");
  append(terms.key_conditioned, "key");
  append(terms.prior, "prior");
  append(terms.biaffine_core, "biaffine");
  return out.empty() ? "none" : out;
}

Transformation Transformation::make(TransformationMode mode) {
  Transformation t;
  t.mode = mode;
  switch (mode) {
    case TransformationMode::None: break;
    case TransformationMode::Biaffine:
      t.terms.biaffine_core = true;
      t.terms.prior = true;
      break;
    case TransformationMode::Decomp:
      t.terms.query_conditioned = true;
      t.terms.key_conditioned = true;
      t.terms.prior = true;
      break;
  }
  return t;
}

void Transformation::validate() const {
  switch (mode) {
    case TransformationMode::None:
      if (terms.any())
        throw ConfigError("transformation mode none admits no bias terms, got " +
                          format_bias_terms(terms));
      break;
    case TransformationMode::Biaffine:
      if (terms.query_conditioned || terms.key_conditioned)
        throw ConfigError("query/key-conditioned terms need mode decomp");
      break;
    case TransformationMode::Decomp:
      if (terms.biaffine_core)
        throw ConfigError("the biaffine term needs mode biaffine");
      break;
  }
}

LayerRange LayerRange::top(std::size_t k, std::size_t layers) {
  if (k > layers)
    throw ConfigError("cannot take the top " + std::to_string(k) + " of " +
                      std::to_string(layers) + " layers");
  return {layers - k, layers};
}

std::size_t LayerRange::count(std::size_t layers) const noexcept {
  const auto lo = std::min(begin, layers);
  const auto hi = std::min(end, layers);
  return hi > lo ? hi - lo : 0;
}

LayerRange parse_layer_range(std::string_view text, std::size_t layers) {
  if (text == "all") return LayerRange::all();
  if (text == "none") return LayerRange::none();
  auto to_size = [&text](std::string_view s) {
    try {
      std::size_t used = 0;
      const auto v = std::stoull(std::string(s), &used);
      if (used != s.size()) throw std::invalid_argument("trailing");
      return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
      throw ConfigError("bad layer range '" + std::string(text) + "'");
    }
  };
  if (text.starts_with("top:")) return LayerRange::top(to_size(text.substr(4)), layers);
  const auto dash = text.find('-');
  if (dash == std::string_view::npos)
    throw ConfigError("bad layer range '" + std::string(text) +
                      "' (expected all, none, top:K or A-B)");
  return {to_size(text.substr(0, dash)), to_size(text.substr(dash + 1))};
}

std::string format_layer_range(const LayerRange& range) {
  if (range == LayerRange::all()) return "all";
  if (range.begin >= range.end) return "none";
  return std::to_string(range.begin) + "-" + std::to_string(range.end);
}

void EncoderConfig::validate() const {
  if (layers == 0 || heads == 0 || d_model == 0 || ffn_multiplier == 0)
    throw ConfigError("encoder sizes must be positive");
  if (d_model % heads != 0)
    throw ConfigError("d_model " + std::to_string(d_model) +
                      " is not divisible by " + std::to_string(heads) + " heads");
  transform.validate();
  if (!(structured_layers == LayerRange::all()) &&
      structured_layers.begin < structured_layers.end &&
      structured_layers.end > layers)
    throw ConfigError("structured layer range " +
                      format_layer_range(structured_layers) + " exceeds " +
                      std::to_string(layers) + " layers");
}

StructureMasks StructureMasks::from(const StructureMatrix& s) {
  StructureMasks out;
  out.n = s.size();
  const auto& cells = s.cells();
  for (auto t : kStructuredDependencies) {
    auto& mask = out.masks[index_of(t)];
    mask.assign(cells.size(), 0.0);
    for (std::size_t i = 0; i < cells.size(); ++i)
      if (cells[i] == index_of(t)) {
        mask[i] = 1.0;
        out.present[index_of(t)] = true;
      }
  }
  return out;
}

QKV project_qkv(const Tensor& x, const AttentionHead& head) {
  return {ops::matmul(x, head.wq), ops::matmul(x, head.wk),
          ops::matmul(x, head.wv)};
}

Tensor raw_scores(const Tensor& q, const Tensor& k) {
  const double inv = 1.0 / std::sqrt(static_cast<double>(q.cols()));
  return ops::scale(ops::matmul(q, ops::transpose(k)), inv);
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw ShapeError("dot: lengths " + std::to_string(a.size()) + " and " +
                     std::to_string(b.size()));
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

}  // namespace

double biaffine_bias(std::span<const double> q, std::span<const double> k,
                     const DependencyTransform& t, const BiasTerms& terms) {
  double out = 0.0;
  if (terms.biaffine_core) {
    const std::size_t d = q.size();
    if (t.core.rows() != d || t.core.cols() != k.size())
      throw ShapeError("biaffine_bias: core " + shape_string(t.core.shape()) +
                       " vs vectors of " + std::to_string(d) + " and " +
                       std::to_string(k.size()));
    const auto a = t.core.values();
    for (std::size_t i = 0; i < d; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < k.size(); ++j) row += a[i * k.size() + j] * k[j];
      out += q[i] * row;
    }
  }
  if (terms.prior) out += t.prior.item();
  return out;
}

double decomp_bias(std::span<const double> q, std::span<const double> k,
                   const DependencyTransform& t, const BiasTerms& terms) {
  double out = 0.0;
  if (terms.query_conditioned) out += dot(q, t.key_vec.values());
  if (terms.key_conditioned) out += dot(t.query_vec.values(), k);
  if (terms.prior) out += t.prior.item();
  return out;
}

Tensor structured_bias(const Tensor& q, const Tensor& k,
                       const StructureMasks& masks, const AttentionHead& head,
                       const Transformation& transform) {
  if (transform.mode == TransformationMode::None || !transform.terms.any())
    return {};
  const std::size_t n = q.rows();
  if (masks.n != n || k.rows() != n)
    throw ShapeError("structured_bias: structure of size " +
                     std::to_string(masks.n) + " for " + std::to_string(n) +
                     " queries and " + std::to_string(k.rows()) + " keys");
  const auto& terms = transform.terms;
  Tensor total;
  Tensor ones;
  for (auto s : kStructuredDependencies) {
    if (!masks.present[index_of(s)]) continue;
    const auto& t = head.transform(s);
    Tensor contextual;
    if (transform.mode == TransformationMode::Biaffine) {
      if (terms.biaffine_core)
        contextual = ops::matmul(ops::matmul(q, t.core), ops::transpose(k));
    } else if (terms.query_conditioned || terms.key_conditioned) {
      Tensor col = terms.query_conditioned
                       ? ops::matmul(q, ops::transpose(t.key_vec))
                       : Tensor::zeros({n, 1});
      Tensor row = terms.key_conditioned
                       ? ops::matmul(t.query_vec, ops::transpose(k))
                       : Tensor::zeros({1, n});
      contextual = ops::add_outer(col, row);
    }
    Tensor cell;
    if (terms.prior) {
      if (!ones.defined()) ones = Tensor::full({n, n}, 1.0);
      Tensor prior = ops::scale_by(ones, t.prior);
      cell = contextual.defined() ? ops::add(contextual, prior) : prior;
    } else {
      cell = contextual;
    }
    cell = ops::mul_constant(cell, masks.masks[index_of(s)]);
    total = total.defined() ? ops::add(total, cell) : cell;
  }
  return total;
}

Tensor structured_scores(const Tensor& q, const Tensor& k, const Tensor& bias,
                         std::span<const std::uint8_t> key_padding) {
  const double inv = 1.0 / std::sqrt(static_cast<double>(q.cols()));
  Tensor scores = ops::matmul(q, ops::transpose(k));
  if (bias.defined()) {
    if (bias.shape() != scores.shape())
      throw ShapeError("structured_scores: bias " + shape_string(bias.shape()) +
                       " vs scores " + shape_string(scores.shape()));
    scores = ops::add(scores, bias);
  }
  scores = ops::scale(scores, inv);
  if (!key_padding.empty()) {
    const std::size_t n = scores.rows(), m = scores.cols();
    if (key_padding.size() != m)
      throw ShapeError("structured_scores: padding mask of " +
                       std::to_string(key_padding.size()) + " for " +
                       std::to_string(m) + " keys");
    bool any = false;
    std::vector<std::uint8_t> mask(n * m, 0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < m; ++j)
        if (key_padding[j]) {
          mask[i * m + j] = 1;
          any = true;
        }
    if (any)
      scores = ops::masked_fill(scores, mask,
                                -std::numeric_limits<double>::infinity());
  }
  return scores;
}

Tensor attend(const Tensor& scores, const Tensor& v) {
  return ops::matmul(ops::softmax_rows(scores), v);
}

void BiasRecorder::add(std::size_t layer, std::size_t head, DependencyType dep,
                       double value) {
  if (dep == DependencyType::NA) return;
  auto& s = sums_[{layer, head, index_of(dep)}];
  s.total += value;
  ++s.count;
}

void BiasRecorder::merge(const BiasRecorder& other) {
  for (const auto& [key, s] : other.sums_) {
    auto& mine = sums_[key];
    mine.total += s.total;
    mine.count += s.count;
  }
}

std::vector<BiasRecord> BiasRecorder::records() const {
  std::vector<BiasRecord> out;
  for (const auto& [key, s] : sums_) {
    if (s.count == 0) continue;
    out.push_back(BiasRecord{key[0], key[1],
                             static_cast<DependencyType>(key[2]),
                             s.total / static_cast<double>(s.count), s.count});
  }
  return out;
}

Encoder::Encoder(EncoderConfig config, ParameterStore& store, Rng& rng)
    : config_(std::move(config)) {
  config_.validate();
  const std::size_t d = config_.d_model;
  const std::size_t dh = config_.head_dim();
  const std::size_t inner = d * config_.ffn_multiplier;
  const auto& tf = config_.transform;

  layers_.resize(config_.layers);
  for (std::size_t l = 0; l < config_.layers; ++l) {
    auto& layer = layers_[l];
    layer.structured = config_.structured_layers.contains(l) &&
                       tf.mode != TransformationMode::None;
    const std::string prefix = "encoder.L" + std::to_string(l) + ".";
    layer.heads.resize(config_.heads);
    for (std::size_t h = 0; h < config_.heads; ++h) {
      auto& head = layer.heads[h];
      const std::string hp = prefix + "H" + std::to_string(h) + ".";
      head.wq = store.add(hp + "wq", xavier_uniform(d, dh, rng));
      head.wk = store.add(hp + "wk", xavier_uniform(d, dh, rng));
      head.wv = store.add(hp + "wv", xavier_uniform(d, dh, rng));
      if (tf.mode == TransformationMode::None) continue;
      for (auto s : kStructuredDependencies) {
        static constexpr std::array<const char*, kDependencyCount> kKeys{
            "NA", "IntraNE", "InterRelate", "IntraRelate", "InterCoref",
            "IntraCoref"};
        const std::string sp = hp + kKeys[index_of(s)] + ".";
        auto& t = head.transforms[index_of(s)];
        const bool live = layer.structured;
        if (tf.mode == TransformationMode::Biaffine) {
          t.core = store.add(sp + "A", Tensor::zeros({dh, dh}),
                             live && tf.terms.biaffine_core);
        } else {
          t.query_vec = store.add(sp + "Q", Tensor::zeros({1, dh}),
                                  live && tf.terms.key_conditioned);
          t.key_vec = store.add(sp + "K", Tensor::zeros({1, dh}),
                                live && tf.terms.query_conditioned);
        }
        t.prior = store.add(sp + "b", Tensor::scalar(0.0), live && tf.terms.prior);
      }
    }
    layer.wo = store.add(prefix + "wo", xavier_uniform(d, d, rng));
    layer.bo = store.add(prefix + "bo", Tensor::zeros({1, d}));
    layer.ln1_gain = store.add(prefix + "ln1.gain", Tensor::full({1, d}, 1.0));
    layer.ln1_bias = store.add(prefix + "ln1.bias", Tensor::zeros({1, d}));
    layer.ffn_in = store.add(prefix + "ffn.w1", xavier_uniform(d, inner, rng));
    layer.ffn_in_bias = store.add(prefix + "ffn.b1", Tensor::zeros({1, inner}));
    layer.ffn_out = store.add(prefix + "ffn.w2", xavier_uniform(inner, d, rng));
    layer.ffn_out_bias = store.add(prefix + "ffn.b2", Tensor::zeros({1, d}));
    layer.ln2_gain = store.add(prefix + "ln2.gain", Tensor::full({1, d}, 1.0));
    layer.ln2_bias = store.add(prefix + "ln2.bias", Tensor::zeros({1, d}));
  }
}

const DependencyTransform& Encoder::checked_transform(DependencyType s,
                                                      std::size_t layer,
                                                      std::size_t head) const {
  if (s == DependencyType::NA)
    throw Error("NA carries no transformation parameters");
  if (layer >= layers_.size() || head >= config_.heads)
    throw Error("layer/head index out of range");
  return layers_[layer].heads[head].transform(s);
}

double Encoder::biaffine_bias(std::span<const double> q,
                              std::span<const double> k, DependencyType s,
                              std::size_t layer, std::size_t head) const {
  if (config_.transform.mode != TransformationMode::Biaffine)
    throw Error("biaffine_bias on an encoder in mode " +
                std::string(mode_name(config_.transform.mode)));
  return ssan::biaffine_bias(q, k, checked_transform(s, layer, head),
                             config_.transform.terms);
}

double Encoder::decomp_bias(std::span<const double> q,
                            std::span<const double> k, DependencyType s,
                            std::size_t layer, std::size_t head) const {
  if (config_.transform.mode != TransformationMode::Decomp)
    throw Error("decomp_bias on an encoder in mode " +
                std::string(mode_name(config_.transform.mode)));
  return ssan::decomp_bias(q, k, checked_transform(s, layer, head),
                           config_.transform.terms);
}

Tensor Encoder::layer_scores(const Tensor& x, const StructureMasks& masks,
                             std::size_t layer, std::size_t head,
                             std::span<const std::uint8_t> key_padding) const {
  const auto& block = layers_.at(layer);
  const auto& h = block.heads.at(head);
  auto [q, k, v] = project_qkv(x, h);
  Tensor bias;
  if (block.structured) bias = structured_bias(q, k, masks, h, config_.transform);
  return structured_scores(q, k, bias, key_padding);
}

Tensor Encoder::forward(const Tensor& x, const StructureMatrix& structure,
                        std::span<const std::uint8_t> key_padding,
                        BiasRecorder* recorder) const {
  if (x.rank() != 2 || x.cols() != config_.d_model)
    throw ShapeError("encoder: input shape " + shape_string(x.shape()) +
                     " does not match d_model " +
                     std::to_string(config_.d_model));
  const std::size_t n = x.rows();
  if (structure.size() != n)
    throw ShapeError("encoder: structure of size " +
                     std::to_string(structure.size()) + " for " +
                     std::to_string(n) + " tokens");
  if (!key_padding.empty() && key_padding.size() != n)
    throw ShapeError("encoder: padding mask of " +
                     std::to_string(key_padding.size()) + " for " +
                     std::to_string(n) + " tokens");

  std::optional<StructureMasks> masks;
  const bool any_structured =
      config_.transform.mode != TransformationMode::None && !structure.all_na();
  if (any_structured) masks = StructureMasks::from(structure);

  Tensor hidden = x;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& block = layers_[l];
    std::vector<Tensor> heads;
    heads.reserve(block.heads.size());
    for (std::size_t h = 0; h < block.heads.size(); ++h) {
      const auto& head = block.heads[h];
      auto [q, k, v] = project_qkv(hidden, head);
      Tensor bias;
      if (block.structured && masks)
        bias = structured_bias(q, k, *masks, head, config_.transform);
      if (recorder && bias.defined()) {
        const auto values = bias.values();
        const auto& cells = structure.cells();
        for (std::size_t i = 0; i < n; ++i) {
          if (!key_padding.empty() && key_padding[i]) continue;
          for (std::size_t j = 0; j < n; ++j) {
            if (!key_padding.empty() && key_padding[j]) continue;
            recorder->add(l, h, static_cast<DependencyType>(cells[i * n + j]),
                          values[i * n + j]);
          }
        }
      }
      heads.push_back(attend(structured_scores(q, k, bias, key_padding), v));
    }
    Tensor attended = ops::add_row(ops::matmul(ops::concat_cols(heads), block.wo),
                                   block.bo);
    hidden = ops::layer_norm(ops::add(hidden, attended), block.ln1_gain,
                             block.ln1_bias, config_.layer_norm_eps);
    Tensor inner = ops::relu(
        ops::add_row(ops::matmul(hidden, block.ffn_in), block.ffn_in_bias));
    Tensor ffn = ops::add_row(ops::matmul(inner, block.ffn_out), block.ffn_out_bias);
    hidden = ops::layer_norm(ops::add(hidden, ffn), block.ln2_gain,
                             block.ln2_bias, config_.layer_norm_eps);
  }
  return hidden;
}

}  // namespace ssan
