#pragma once

#include <compare>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "ssan/document.hpp"
#include "ssan/relation_head.hpp"
#include "ssan/relation_schema.hpp"

namespace ssan {

/// One relational fact of one document: entities by their corpus ordinal.
struct FactKey {
  std::string doc_id;
  std::size_t head = 0;
  std::size_t tail = 0;
  std::string relation;

  auto operator<=>(const FactKey&) const = default;
};

struct MetricCounts {
  std::size_t gold = 0;
  std::size_t predicted = 0;
  std::size_t correct = 0;
  std::size_t correct_in_train = 0;

  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double ign_precision = 0.0;
  double ign_recall = 0.0;
  double ign_f1 = 0.0;
  bool recall_undefined = false;  // gold == 0

  /// Fills the rates from the counts.
  void finalize();
};

struct EvalReport {
  MetricCounts overall;
  std::vector<std::pair<std::string, MetricCounts>> per_relation;

  const MetricCounts* relation(std::string_view name) const;
};

/// F1 = 2PR/(P+R) (0 when P+R = 0).
double f1_score(double precision, double recall) noexcept;

/// Compares predicted and gold fact sets. `in_train` decides whether a correct
/// prediction counts toward C_in:
///   Ign P = (correct - C_in) / (predicted - C_in), Ign R = correct / gold.
/// `relations` fixes the order of the per-relation breakdown (relations outside
/// it are appended in sorted order).
EvalReport score_facts(const std::set<FactKey>& predicted,
                       const std::set<FactKey>& gold,
                       const std::function<bool(const FactKey&)>& in_train,
                       std::span<const std::string> relations = {});

/// Same, with exact membership in a set of training facts.
EvalReport score_facts(const std::set<FactKey>& predicted,
                       const std::set<FactKey>& gold,
                       const std::set<FactKey>& train_facts = {},
                       std::span<const std::string> relations = {});

/// Facts of a training corpus keyed by mention names: a fact is known when
/// some (head mention name, tail mention name, relation) triple of it appears
/// among the training facts.
class TrainFactIndex {
 public:
  TrainFactIndex() = default;
  explicit TrainFactIndex(std::span<const Document> train);

  bool contains(const Document& doc, std::size_t head, std::size_t tail,
                const std::string& relation) const;
  std::size_t size() const noexcept { return triples_.size(); }
  bool empty() const noexcept { return triples_.empty(); }

 private:
  std::set<std::tuple<std::string, std::string, std::string>> triples_;
};

std::set<FactKey> gold_facts(std::span<const Document> docs);

/// Pair scores of one document with entities given by corpus ordinal.
struct DocumentScores {
  std::string doc_id;
  std::vector<PairScore> pairs;
};

struct PredictionRecord {
  std::string doc_id;
  std::size_t head = 0;
  std::size_t tail = 0;
  std::string relation;
  double probability = 0.0;
};

std::vector<PredictionRecord> predictions_at(std::span<const DocumentScores> scores,
                                             const RelationSchema& schema,
                                             double threshold);

/// Scores, gold facts and Ign membership for `docs` (aligned with `scores`).
EvalReport evaluate_scores(std::span<const DocumentScores> scores,
                           std::span<const Document> docs,
                           const RelationSchema& schema,
                           const TrainFactIndex& train, double threshold);

struct ThresholdChoice {
  double threshold = 0.5;
  double f1 = 0.0;
};

/// Sweeps the sorted unique probabilities, predicting p >= theta, and returns
/// the theta with the best F1 (ties to the larger theta). Without candidates,
/// the default 0.5 is returned.
ThresholdChoice tune_threshold(std::span<const DocumentScores> scores,
                               std::span<const Document> docs,
                               const RelationSchema& schema);

/// Tab-separated table, one row per scope ("all", then each relation).
void write_report(std::ostream& out, const EvalReport& report);
EvalReport read_report(std::istream& in);

/// One JSON object per line: doc_id, h, t, r, probability.
void write_predictions(std::ostream& out, std::span<const PredictionRecord> records);

}  // namespace ssan
