#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "ssan/batching.hpp"
#include "ssan/relation_schema.hpp"
#include "ssan/tensor.hpp"

namespace ssan {

/// Input embedding tables. `type` and `coref` may be left undefined to drop
/// that feature.
struct EmbeddingTables {
  Tensor word;      // vocab x d
  Tensor position;  // max_len x d
  Tensor type;      // (types + 1) x d, row 0 = non-entity
  Tensor coref;     // (capacity + 1) x d, row 0 = non-entity
};

/// word + position + type + coref per token, padded to `length` rows
/// (0 = the document's own length). Throws ConfigError when an entity
/// ordinal or a position exceeds its table.
Tensor embed_inputs(const EncodedDocument& doc, const EmbeddingTables& tables,
                    std::size_t length = 0);

struct EntityRepresentation {
  std::size_t entity_index = 0;
  std::vector<double> vector;
};

/// N x d matrix whose row e is the mean of `hidden` over every token of every
/// mention of entity e.
Tensor pool_entities(const Tensor& hidden,
                     std::span<const std::vector<std::size_t>> entity_tokens);
std::vector<EntityRepresentation> entity_representations(const Tensor& pooled);

/// Magnitude boundaries of the signed distance buckets.
inline constexpr std::array<long, 9> kDistanceBoundaries{1,  2,  4,   8,  16,
                                                         32, 64, 128, 256};
inline constexpr std::size_t kDistanceBuckets = 2 * kDistanceBoundaries.size() + 1;

/// Bucket 9 holds distance 0; buckets 10..18 hold positive distances with
/// magnitude >= boundary[k]; 0..8 mirror them for negative distances.
std::size_t distance_bucket(long distance) noexcept;

/// Ordered pairs (s, o), s != o, in row-major order.
struct PairIndex {
  std::vector<std::size_t> subjects;
  std::vector<std::size_t> objects;

  static PairIndex all_pairs(std::size_t entities);
  std::size_t size() const noexcept { return subjects.size(); }
};

struct PairFeatures {
  Tensor subject;  // P x d_e
  Tensor object;   // P x d_e
};

/// Gathers pair rows and, when `distance_table` is defined, appends the
/// embedding of the signed anchor distance (object - subject for the subject,
/// the mirrored bucket for the object).
PairFeatures pair_features(const Tensor& entities, const PairIndex& pairs,
                           std::span<const std::size_t> anchors,
                           const Tensor& distance_table);

/// P x M matrix of sigmoid(e_s W_r e_o).
Tensor score_pairs(const Tensor& subject, const Tensor& object,
                   std::span<const Tensor> relation_weights);

struct PairScore {
  std::size_t subject = 0;
  std::size_t object = 0;
  std::vector<double> probabilities;
};

std::vector<PairScore> to_pair_scores(const Tensor& probabilities,
                                      const PairIndex& pairs);

/// Scores every ordered pair of the entity rows directly (no distance
/// features): N(N-1) PairScores of length M.
std::vector<PairScore> score_relations(const Tensor& entities,
                                       std::span<const Tensor> relation_weights);

/// 0/1 targets aligned with `pairs` x schema. Throws ValidationError for a
/// relation outside the schema or an invalid entity index.
std::vector<double> pair_targets(const PairIndex& pairs,
                                 std::span<const RelationFact> facts,
                                 const RelationSchema& schema,
                                 const std::string& doc_id = "");

/// Summed binary cross-entropy with probabilities clipped to [1e-7, 1-1e-7].
Tensor compute_loss(const Tensor& probabilities, std::span<const double> targets);

struct PredictedRelation {
  std::size_t subject = 0;
  std::size_t object = 0;
  std::size_t relation = 0;
  double probability = 0.0;
};

/// Every (s, o, r) with probability >= threshold.
std::vector<PredictedRelation> predict(std::span<const PairScore> scores,
                                       double threshold);

}  // namespace ssan
