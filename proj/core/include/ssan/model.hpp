#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "ssan/batching.hpp"
#include "ssan/checkpoint.hpp"
#include "ssan/config.hpp"
#include "ssan/encoder.hpp"
#include "ssan/parameter.hpp"
#include "ssan/relation_head.hpp"
#include "ssan/relation_schema.hpp"
#include "ssan/vocab.hpp"

namespace ssan {

/// Embeddings, SSAN encoder and bilinear relation head with their parameters.
class RelationModel {
 public:
  RelationModel(ModelConfig config, Vocabulary vocab, TypeInventory types,
                RelationSchema schema);

  RelationModel(const RelationModel&) = delete;
  RelationModel& operator=(const RelationModel&) = delete;
  RelationModel(RelationModel&&) = default;

  const ModelConfig& config() const noexcept { return config_; }
  const Vocabulary& vocab() const noexcept { return vocab_; }
  const TypeInventory& types() const noexcept { return types_; }
  const RelationSchema& schema() const noexcept { return schema_; }
  ParameterStore& store() noexcept { return store_; }
  const ParameterStore& store() const noexcept { return store_; }
  const Encoder& encoder() const noexcept { return encoder_; }
  const EmbeddingTables& embeddings() const noexcept { return tables_; }
  const Tensor& distance_table() const noexcept { return distance_; }
  std::span<const Tensor> relation_weights() const noexcept { return relations_; }

  EncodeOptions encode_options() const;
  EncodedDocument encode(const Document& doc,
                         std::vector<std::string>* warnings = nullptr) const;

  struct Output {
    PairIndex pairs;
    Tensor probabilities;  // pairs x M; undefined when fewer than two entities
  };

  /// Runs one document. With `length` > doc length the input is right-padded
  /// and `structure` must be the matching NA-padded matrix.
  Output forward(const EncodedDocument& doc, std::size_t length = 0,
                 std::span<const std::uint8_t> key_padding = {},
                 const StructureMatrix* structure = nullptr,
                 BiasRecorder* recorder = nullptr) const;

  /// Summed BCE against the document's facts; undefined when no pairs.
  Tensor loss(const EncodedDocument& doc, const Output& output) const;

  /// Pair scores of one document without recording a graph.
  std::vector<PairScore> score(const EncodedDocument& doc,
                               BiasRecorder* recorder = nullptr) const;

  /// Metadata keys: config, vocab, types, schema, threshold.
  Checkpoint checkpoint(const AdamState& optimizer, double threshold) const;
  static RelationModel from_checkpoint(const Checkpoint& checkpoint);

 private:
  ModelConfig config_;
  Vocabulary vocab_;
  TypeInventory types_;
  RelationSchema schema_;
  ParameterStore store_;
  Rng rng_;
  EmbeddingTables tables_;
  Encoder encoder_;
  Tensor distance_;
  std::vector<Tensor> relations_;
};

/// Threshold stored in a checkpoint (0.5 when absent).
double checkpoint_threshold(const Checkpoint& checkpoint);

}  // namespace ssan
