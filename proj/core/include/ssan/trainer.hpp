#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ssan/checkpoint.hpp"
#include "ssan/config.hpp"
#include "ssan/document.hpp"
#include "ssan/encoder.hpp"
#include "ssan/error.hpp"
#include "ssan/metrics.hpp"
#include "ssan/model.hpp"

namespace ssan {

/// Raised when the training loss stops being finite.
class DivergenceError : public Error {
 public:
  DivergenceError(std::size_t epoch, std::size_t step, double loss);
  std::size_t epoch() const noexcept { return epoch_; }
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t epoch_;
  std::size_t step_;
};

struct EpochLog {
  std::size_t epoch = 0;  // 1-based
  double loss = 0.0;      // summed over the epoch
  double threshold = 0.5;
  std::optional<double> train_f1;
  std::optional<double> dev_f1;
  std::optional<double> dev_ign_f1;
};

struct TrainOptions {
  /// Also score the training set after each epoch.
  bool eval_train = false;
  /// Stop once the training F1 reaches this value (needs eval_train).
  std::optional<double> stop_at_train_f1;
  /// Per-epoch progress lines go here when set.
  std::ostream* progress = nullptr;
};

struct TrainResult {
  Checkpoint best;              // best dev F1, or the last epoch without dev
  std::size_t best_epoch = 0;
  double best_dev_f1 = 0.0;
  double threshold = 0.5;
  std::vector<EpochLog> log;
  std::vector<std::string> warnings;  // truncation notices
};

/// Schema from the config file when given, else every relation in the corpora.
RelationSchema resolve_schema(const ModelConfig& config,
                              std::span<const Document> train,
                              std::span<const Document> dev);

/// Fresh model whose vocabulary and type inventory come from the corpora.
RelationModel initialize_model(const ModelConfig& config,
                               std::span<const Document> train,
                               std::span<const Document> dev);

TrainResult train(const ModelConfig& config, std::span<const Document> train_docs,
                  std::span<const Document> dev_docs, const TrainOptions& options = {});

/// Pair scores for every document, entities renamed to corpus ordinals.
std::vector<DocumentScores> score_corpus(const RelationModel& model,
                                         std::span<const Document> docs,
                                         BiasRecorder* recorder = nullptr);

EvalReport evaluate(const RelationModel& model, std::span<const Document> docs,
                    const TrainFactIndex& train_facts, double threshold);

ThresholdChoice tune_threshold(const RelationModel& model,
                               std::span<const Document> dev);

/// Runs the encoder over `docs` with bias recording and aggregates per layer.
BiasHeatmap export_bias(const RelationModel& model, std::span<const Document> docs);

void write_train_log(std::ostream& out, std::span<const EpochLog> log);

/// Writes config.txt, checkpoint.bin, train_log.tsv and, when dev documents
/// are given, dev_report.tsv plus dev_predictions.jsonl.
void write_run_directory(const std::filesystem::path& dir, const ModelConfig& config,
                         const TrainResult& result, std::span<const Document> train_docs,
                         std::span<const Document> dev_docs);

/// Explicit value lists per configuration key.
using SweepGrid = std::map<std::string, std::vector<std::string>>;

/// "key=v1,v2" specifications; throws ConfigError on malformed entries.
SweepGrid parse_sweep(std::span<const std::string> specs);

struct SweepRun {
  ModelConfig config;
  double dev_f1 = 0.0;
};

struct SweepResult {
  std::vector<SweepRun> runs;  // cartesian product in key order
  std::size_t best = 0;        // first run with the highest dev F1
};

SweepResult sweep(const ModelConfig& base, const SweepGrid& grid,
                  std::span<const Document> train_docs,
                  std::span<const Document> dev_docs);

}  // namespace ssan
