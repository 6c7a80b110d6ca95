#include "ssan/relation_head.hpp"

#include <cstdlib>

#include "ssan/error.hpp"
#include "ssan/ops.hpp"

namespace ssan {

Tensor embed_inputs(const EncodedDocument& doc, const EmbeddingTables& tables,
                    std::size_t length) {
  const std::size_t n = doc.length();
  if (length == 0) length = n;
  if (length < n)
    throw ShapeError("embed_inputs: padded length " + std::to_string(length) +
                     " below document length " + std::to_string(n));
  if (length > tables.position.rows())
    throw ConfigError("document '" + doc.doc.doc_id + "' has " +
                      std::to_string(length) +
                      " positions but the position table holds " +
                      std::to_string(tables.position.rows()));

  std::vector<std::size_t> words(length, 0), positions(length), types(length, 0),
      corefs(length, 0);
  for (std::size_t i = 0; i < length; ++i) positions[i] = i;
  std::copy(doc.token_ids.begin(), doc.token_ids.end(), words.begin());
  std::copy(doc.type_ids.begin(), doc.type_ids.end(), types.begin());
  std::copy(doc.coref_ids.begin(), doc.coref_ids.end(), corefs.begin());

  Tensor x = ops::add(ops::embedding_lookup(tables.word, words),
                      ops::embedding_lookup(tables.position, positions));
  if (tables.type.defined()) {
    for (auto t : types)
      if (t >= tables.type.rows())
        throw ConfigError("document '" + doc.doc.doc_id + "': entity type index " +
                          std::to_string(t) + " exceeds the type table");
    x = ops::add(x, ops::embedding_lookup(tables.type, types));
  }
  if (tables.coref.defined()) {
    for (auto c : corefs)
      if (c >= tables.coref.rows())
        throw ConfigError("document '" + doc.doc.doc_id + "': entity ordinal " +
                          std::to_string(c - 1) +
                          " exceeds the coreference table capacity " +
                          std::to_string(tables.coref.rows() - 1));
    x = ops::add(x, ops::embedding_lookup(tables.coref, corefs));
  }
  return x;
}

Tensor pool_entities(const Tensor& hidden,
                     std::span<const std::vector<std::size_t>> entity_tokens) {
  if (entity_tokens.empty()) throw ShapeError("pool_entities: no entities");
  std::vector<Tensor> rows;
  rows.reserve(entity_tokens.size());
  for (std::size_t e = 0; e < entity_tokens.size(); ++e) {
    if (entity_tokens[e].empty())
      throw ShapeError("pool_entities: entity " + std::to_string(e) +
                       " has no tokens");
    rows.push_back(ops::mean_axis(ops::gather_rows(hidden, entity_tokens[e]), 0));
  }
  return ops::concat_rows(rows);
}

std::vector<EntityRepresentation> entity_representations(const Tensor& pooled) {
  std::vector<EntityRepresentation> out;
  const auto d = pooled.cols();
  for (std::size_t e = 0; e < pooled.rows(); ++e) {
    const auto v = pooled.values().subspan(e * d, d);
    out.push_back({e, std::vector<double>(v.begin(), v.end())});
  }
  return out;
}

std::size_t distance_bucket(long distance) noexcept {
  const long magnitude = std::labs(distance);
  std::size_t level = 0;
  for (auto boundary : kDistanceBoundaries)
    if (magnitude >= boundary) ++level;
  const std::size_t center = kDistanceBoundaries.size();
  return distance >= 0 ? center + level : center - level;
}

PairIndex PairIndex::all_pairs(std::size_t entities) {
  PairIndex p;
  for (std::size_t s = 0; s < entities; ++s)
    for (std::size_t o = 0; o < entities; ++o)
      if (s != o) {
        p.subjects.push_back(s);
        p.objects.push_back(o);
      }
  return p;
}

PairFeatures pair_features(const Tensor& entities, const PairIndex& pairs,
                           std::span<const std::size_t> anchors,
                           const Tensor& distance_table) {
  PairFeatures f{ops::gather_rows(entities, pairs.subjects),
                 ops::gather_rows(entities, pairs.objects)};
  if (!distance_table.defined()) return f;
  if (anchors.size() != entities.rows())
    throw ShapeError("pair_features: " + std::to_string(anchors.size()) +
                     " anchors for " + std::to_string(entities.rows()) +
                     " entities");
  std::vector<std::size_t> forward, backward;
  forward.reserve(pairs.size());
  backward.reserve(pairs.size());
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const long delta = static_cast<long>(anchors[pairs.objects[p]]) -
                       static_cast<long>(anchors[pairs.subjects[p]]);
    forward.push_back(distance_bucket(delta));
    backward.push_back(distance_bucket(-delta));
  }
  const std::array<Tensor, 2> subject{f.subject,
                                      ops::gather_rows(distance_table, forward)};
  const std::array<Tensor, 2> object{f.object,
                                     ops::gather_rows(distance_table, backward)};
  return {ops::concat_cols(subject), ops::concat_cols(object)};
}

Tensor score_pairs(const Tensor& subject, const Tensor& object,
                   std::span<const Tensor> relation_weights) {
  if (relation_weights.empty()) throw ShapeError("score_pairs: empty schema");
  if (subject.shape() != object.shape())
    throw ShapeError("score_pairs: subject " + shape_string(subject.shape()) +
                     " vs object " + shape_string(object.shape()));
  std::vector<Tensor> logits;
  logits.reserve(relation_weights.size());
  for (const auto& w : relation_weights)
    logits.push_back(ops::sum_axis(ops::mul(ops::matmul(subject, w), object), 1));
  return ops::sigmoid(ops::concat_cols(logits));
}

std::vector<PairScore> to_pair_scores(const Tensor& probabilities,
                                      const PairIndex& pairs) {
  std::vector<PairScore> out;
  const auto m = probabilities.cols();
  out.reserve(pairs.size());
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto row = probabilities.values().subspan(p * m, m);
    out.push_back({pairs.subjects[p], pairs.objects[p],
                   std::vector<double>(row.begin(), row.end())});
  }
  return out;
}

std::vector<PairScore> score_relations(const Tensor& entities,
                                       std::span<const Tensor> relation_weights) {
  const auto pairs = PairIndex::all_pairs(entities.rows());
  if (pairs.size() == 0) return {};
  const auto f = pair_features(entities, pairs, {}, Tensor());
  return to_pair_scores(score_pairs(f.subject, f.object, relation_weights), pairs);
}

std::vector<double> pair_targets(const PairIndex& pairs,
                                 std::span<const RelationFact> facts,
                                 const RelationSchema& schema,
                                 const std::string& doc_id) {
  const auto m = schema.size();
  std::size_t entities = 0;
  for (auto s : pairs.subjects) entities = std::max(entities, s + 1);
  for (auto o : pairs.objects) entities = std::max(entities, o + 1);
  std::vector<double> targets(pairs.size() * m, 0.0);
  for (const auto& f : facts) {
    const auto r = schema.index(f.relation);
    if (!r) throw ValidationError(doc_id, "unknown relation '" + f.relation + "'");
    if (f.head == f.tail || f.head >= entities || f.tail >= entities)
      throw ValidationError(doc_id, "fact references invalid entity pair (" +
                                        std::to_string(f.head) + ", " +
                                        std::to_string(f.tail) + ")");
    // Row-major all_pairs: row = s*(N-1) + (o < s ? o : o-1).
    const auto row = f.head * (entities - 1) + (f.tail < f.head ? f.tail : f.tail - 1);
    targets[row * m + *r] = 1.0;
  }
  return targets;
}

Tensor compute_loss(const Tensor& probabilities, std::span<const double> targets) {
  return ops::binary_cross_entropy(probabilities, targets, 1e-7);
}

std::vector<PredictedRelation> predict(std::span<const PairScore> scores,
                                       double threshold) {
  std::vector<PredictedRelation> out;
  for (const auto& s : scores)
    for (std::size_t r = 0; r < s.probabilities.size(); ++r)
      if (s.probabilities[r] >= threshold)
        out.push_back({s.subject, s.object, r, s.probabilities[r]});
  return out;
}

}  // namespace ssan
