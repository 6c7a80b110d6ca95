#include "ssan/trainer.hpp"

#include <cmath>
#include <fstream>
#include <ostream>
#include <set>
#include <vector>

#include "ssan/batching.hpp"
#include "ssan/ops.hpp"
#include "ssan/optimizer.hpp"

namespace ssan {
namespace {

std::vector<Document> joined(std::span<const Document> a, std::span<const Document> b) {
  std::vector<Document> out(a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

std::string optional_cell(const std::optional<double>& v) {
  return v ? std::to_string(*v) : std::string("-");
}

}  // namespace

DivergenceError::DivergenceError(std::size_t epoch, std::size_t step, double loss)
    : Error("training diverged at epoch " + std::to_string(epoch) + ", step " +
            std::to_string(step) + " (loss " + std::to_string(loss) + ")"),
      epoch_(epoch),
      step_(step) {}

RelationSchema resolve_schema(const ModelConfig& config,
                              std::span<const Document> train,
                              std::span<const Document> dev) {
  if (!config.schema.empty()) return RelationSchema::load(config.schema);
  return RelationSchema::from_corpus(joined(train, dev));
}

RelationModel initialize_model(const ModelConfig& config,
                               std::span<const Document> train,
                               std::span<const Document> dev) {
  if (train.empty()) throw ConfigError("training corpus is empty");
  const auto all = joined(train, dev);
  return RelationModel(config, Vocabulary::build(train, config.min_count),
                       TypeInventory::build(all), resolve_schema(config, train, dev));
}

std::vector<DocumentScores> score_corpus(const RelationModel& model,
                                         std::span<const Document> docs,
                                         BiasRecorder* recorder) {
  std::vector<DocumentScores> out;
  out.reserve(docs.size());
  for (const auto& doc : docs) {
    const auto encoded = model.encode(doc);
    DocumentScores s{doc.doc_id, model.score(encoded, recorder)};
    for (auto& p : s.pairs) {
      p.subject = encoded.doc.entities[p.subject].ordinal;
      p.object = encoded.doc.entities[p.object].ordinal;
    }
    out.push_back(std::move(s));
  }
  return out;
}

EvalReport evaluate(const RelationModel& model, std::span<const Document> docs,
                    const TrainFactIndex& train_facts, double threshold) {
  const auto scores = score_corpus(model, docs);
  return evaluate_scores(scores, docs, model.schema(), train_facts, threshold);
}

ThresholdChoice tune_threshold(const RelationModel& model,
                               std::span<const Document> dev) {
  const auto scores = score_corpus(model, dev);
  return tune_threshold(scores, dev, model.schema());
}

BiasHeatmap export_bias(const RelationModel& model, std::span<const Document> docs) {
  BiasRecorder recorder;
  score_corpus(model, docs, &recorder);
  const auto records = recorder.records();
  return export_bias_heatmap(records, model.config().layers);
}

TrainResult train(const ModelConfig& config, std::span<const Document> train_docs,
                  std::span<const Document> dev_docs, const TrainOptions& options) {
  config.validate();
  auto model = initialize_model(config, train_docs, dev_docs);
  TrainResult result;
  const auto encoded =
      encode_corpus(train_docs, model.vocab(), model.types(), model.encode_options(),
                    &result.warnings);
  Adam adam(config.adam_config());
  const TrainFactIndex train_index(train_docs);
  const TrainFactIndex no_train;

  double best_f1 = -1.0;
  std::size_t step = 0;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    EpochLog entry;
    entry.epoch = epoch;
    entry.threshold = config.threshold;
    for (const auto& batch : make_batches(encoded, config.batch_size, config.seed + epoch)) {
      ++step;
      model.store().zero_grad();
      double batch_loss = 0.0;
      for (std::size_t row = 0; row < batch.size(); ++row) {
        const auto& doc = encoded[batch.doc_indices[row]];
        const auto out = model.forward(doc, batch.length, batch.padding(row),
                                       &batch.structures[row]);
        const auto loss = model.loss(doc, out);
        if (!loss.defined()) continue;
        const double value = loss.item();
        if (!std::isfinite(value)) throw DivergenceError(epoch, step, value);
        loss.backward();
        batch_loss += value;
      }
      adam.step(model.store().all());
      entry.loss += batch_loss;
    }

    if (!dev_docs.empty()) {
      const auto scores = score_corpus(model, dev_docs);
      if (config.auto_threshold)
        entry.threshold = tune_threshold(scores, dev_docs, model.schema()).threshold;
      const auto report =
          evaluate_scores(scores, dev_docs, model.schema(), train_index, entry.threshold);
      entry.dev_f1 = report.overall.f1;
      entry.dev_ign_f1 = report.overall.ign_f1;
    }
    if (options.eval_train)
      entry.train_f1 = evaluate(model, train_docs, no_train, entry.threshold).overall.f1;

    const bool last = epoch == config.epochs;
    const bool reached = options.stop_at_train_f1 && entry.train_f1 &&
                         *entry.train_f1 >= *options.stop_at_train_f1;
    const bool improved = entry.dev_f1 && *entry.dev_f1 > best_f1;
    if (improved || (dev_docs.empty() && (last || reached))) {
      best_f1 = entry.dev_f1.value_or(0.0);
      result.best = model.checkpoint(adam.state(), entry.threshold);
      result.best_epoch = epoch;
      result.best_dev_f1 = best_f1;
      result.threshold = entry.threshold;
    }
    if (options.progress)
      *options.progress << "epoch " << epoch << " loss " << entry.loss << " train_f1 "
                        << optional_cell(entry.train_f1) << " dev_f1 "
                        << optional_cell(entry.dev_f1) << '\n';
    result.log.push_back(entry);
    if (reached) break;
  }
  if (result.best_epoch == 0) {
    result.best = model.checkpoint(adam.state(), config.threshold);
    result.best_epoch = result.log.size();
    result.threshold = config.threshold;
  }
  return result;
}

void write_train_log(std::ostream& out, std::span<const EpochLog> log) {
  out << "epoch\tloss\tthreshold\ttrain_f1\tdev_f1\tdev_ign_f1\n";
  for (const auto& e : log)
    out << e.epoch << '\t' << e.loss << '\t' << e.threshold << '\t'
        << optional_cell(e.train_f1) << '\t' << optional_cell(e.dev_f1) << '\t'
        << optional_cell(e.dev_ign_f1) << '\n';
}

void write_run_directory(const std::filesystem::path& dir, const ModelConfig& config,
                         const TrainResult& result, std::span<const Document> train_docs,
                         std::span<const Document> dev_docs) {
  std::filesystem::create_directories(dir);
  config.save(dir / "config.txt");
  result.best.save(dir / "checkpoint.bin");
  {
    std::ofstream log(dir / "train_log.tsv");
    write_train_log(log, result.log);
  }
  if (!result.warnings.empty()) {
    std::ofstream w(dir / "warnings.txt");
    for (const auto& line : result.warnings) w << line << '\n';
  }
  if (dev_docs.empty()) return;
  const auto model = RelationModel::from_checkpoint(result.best);
  const auto scores = score_corpus(model, dev_docs);
  const auto report = evaluate_scores(scores, dev_docs, model.schema(),
                                      TrainFactIndex(train_docs), result.threshold);
  std::ofstream rep(dir / "dev_report.tsv");
  write_report(rep, report);
  std::ofstream pred(dir / "dev_predictions.jsonl");
  write_predictions(pred, predictions_at(scores, model.schema(), result.threshold));
}

SweepGrid parse_sweep(std::span<const std::string> specs) {
  SweepGrid grid;
  for (const auto& spec : specs) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size())
      throw ConfigError("sweep entry '" + spec + "' is not key=v1,v2,...");
    const auto key = spec.substr(0, eq);
    ModelConfig probe;
    probe.get(key);  // rejects unknown keys
    std::vector<std::string> values;
    std::size_t start = eq + 1;
    while (true) {
      const auto comma = spec.find(',', start);
      values.push_back(spec.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    grid[key] = std::move(values);
  }
  return grid;
}

SweepResult sweep(const ModelConfig& base, const SweepGrid& grid,
                  std::span<const Document> train_docs,
                  std::span<const Document> dev_docs) {
  std::vector<ModelConfig> configs{base};
  for (const auto& [key, values] : grid) {
    std::vector<ModelConfig> next;
    for (const auto& c : configs)
      for (const auto& v : values) {
        auto copy = c;
        copy.set(key, v);
        next.push_back(std::move(copy));
      }
    configs = std::move(next);
  }
  SweepResult out;
  for (const auto& c : configs) {
    const auto r = train(c, train_docs, dev_docs);
    out.runs.push_back({c, r.best_dev_f1});
    if (r.best_dev_f1 > out.runs[out.best].dev_f1) out.best = out.runs.size() - 1;
  }
  return out;
}

}  // namespace ssan
