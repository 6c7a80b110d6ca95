#include "ssan/model.hpp"

#include <charconv>

#include "ssan/error.hpp"
#include "ssan/ops.hpp"

namespace ssan {
namespace {

Tensor register_table(ParameterStore& store, const std::string& name,
                      std::size_t rows, std::size_t cols, Rng& rng) {
  return store.add(name, xavier_uniform(rows, cols, rng));
}

const std::string& metadata(const Checkpoint& c, const std::string& key) {
  const auto it = c.metadata.find(key);
  if (it == c.metadata.end())
    throw FormatError("checkpoint lacks metadata '" + key + "'");
  return it->second;
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

ModelConfig validated(ModelConfig config) {
  config.validate();
  return config;
}

EmbeddingTables make_tables(const ModelConfig& c, const Vocabulary& vocab,
                            const TypeInventory& types, ParameterStore& store,
                            Rng& rng) {
  EmbeddingTables t;
  t.word = register_table(store, "embed.word", vocab.size(), c.d_model, rng);
  t.position = register_table(store, "embed.position", c.max_len, c.d_model, rng);
  if (c.type_embedding)
    t.type = register_table(store, "embed.type", types.size(), c.d_model, rng);
  if (c.coref_embedding)
    t.coref = register_table(store, "embed.coref", c.coref_capacity + 1, c.d_model, rng);
  return t;
}

}  // namespace

RelationModel::RelationModel(ModelConfig config, Vocabulary vocab,
                             TypeInventory types, RelationSchema schema)
    : config_(validated(std::move(config))),
      vocab_(std::move(vocab)),
      types_(std::move(types)),
      schema_(std::move(schema)),
      rng_(config_.seed),
      tables_(make_tables(config_, vocab_, types_, store_, rng_)),
      encoder_(config_.encoder_config(), store_, rng_) {
  if (schema_.size() == 0) throw ConfigError("relation schema is empty");
  if (config_.d_distance > 0)
    distance_ = register_table(store_, "head.distance", kDistanceBuckets,
                               config_.d_distance, rng_);
  const std::size_t de = config_.d_model + config_.d_distance;
  for (const auto& name : schema_.names())
    relations_.push_back(store_.add("head.W." + name, xavier_uniform(de, de, rng_)));
}

EncodeOptions RelationModel::encode_options() const {
  return {config_.max_len, config_.exclude};
}

EncodedDocument RelationModel::encode(const Document& doc,
                                      std::vector<std::string>* warnings) const {
  return encode_document(doc, vocab_, types_, encode_options(), warnings);
}

RelationModel::Output RelationModel::forward(const EncodedDocument& doc,
                                             std::size_t length,
                                             std::span<const std::uint8_t> key_padding,
                                             const StructureMatrix* structure,
                                             BiasRecorder* recorder) const {
  Output out;
  if (doc.entity_count() < 2) return out;
  out.pairs = PairIndex::all_pairs(doc.entity_count());
  const auto x = embed_inputs(doc, tables_, length);
  const auto& s = structure ? *structure : doc.structure;
  const auto hidden = encoder_.forward(x, s, key_padding, recorder);
  const auto entities = pool_entities(hidden, doc.entity_tokens);
  const auto features = pair_features(entities, out.pairs, doc.entity_anchors, distance_);
  out.probabilities = score_pairs(features.subject, features.object, relations_);
  return out;
}

Tensor RelationModel::loss(const EncodedDocument& doc, const Output& output) const {
  if (!output.probabilities.defined()) return {};
  const auto targets = pair_targets(output.pairs, doc.doc.facts, schema_, doc.doc.doc_id);
  return compute_loss(output.probabilities, targets);
}

std::vector<PairScore> RelationModel::score(const EncodedDocument& doc,
                                            BiasRecorder* recorder) const {
  NoGradGuard guard;
  const auto out = forward(doc, 0, {}, nullptr, recorder);
  if (!out.probabilities.defined()) return {};
  return to_pair_scores(out.probabilities, out.pairs);
}

Checkpoint RelationModel::checkpoint(const AdamState& optimizer, double threshold) const {
  return Checkpoint::capture(store_, optimizer,
                             {{"config", config_.to_text()},
                              {"vocab", vocab_.to_text()},
                              {"types", types_.to_text()},
                              {"schema", schema_.to_text()},
                              {"threshold", format_double(threshold)}});
}

RelationModel RelationModel::from_checkpoint(const Checkpoint& checkpoint) {
  RelationModel model(ModelConfig::from_text(metadata(checkpoint, "config")),
                      Vocabulary::from_text(metadata(checkpoint, "vocab")),
                      TypeInventory::from_text(metadata(checkpoint, "types")),
                      RelationSchema::from_text(metadata(checkpoint, "schema")));
  checkpoint.restore_into(model.store_);
  return model;
}

double checkpoint_threshold(const Checkpoint& checkpoint) {
  const auto it = checkpoint.metadata.find("threshold");
  if (it == checkpoint.metadata.end()) return 0.5;
  double v = 0.5;
  const auto& s = it->second;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw FormatError("checkpoint threshold '" + s + "' is not a number");
  return v;
}

}  // namespace ssan
