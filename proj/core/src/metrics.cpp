#include "ssan/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "ssan/error.hpp"

namespace ssan {
namespace {

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

const std::vector<std::string> kColumns{
    "scope",     "gold",   "predicted", "correct",       "correct_in_train",
    "precision", "recall", "f1",        "ign_precision", "ign_recall",
    "ign_f1",    "recall_undefined"};

void write_row(std::ostream& out, const std::string& scope, const MetricCounts& m) {
  out << scope << '\t' << m.gold << '\t' << m.predicted << '\t' << m.correct << '\t'
      << m.correct_in_train << '\t' << format_double(m.precision) << '\t'
      << format_double(m.recall) << '\t' << format_double(m.f1) << '\t'
      << format_double(m.ign_precision) << '\t' << format_double(m.ign_recall)
      << '\t' << format_double(m.ign_f1) << '\t' << (m.recall_undefined ? 1 : 0)
      << '\n';
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    out.push_back(line.substr(start, tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return out;
}

template <typename T>
T parse_cell(const std::string& text, std::size_t line) {
  T v{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size())
    throw FormatError("report line " + std::to_string(line) + ": bad value '" +
                      text + "'");
  return v;
}

}  // namespace

void MetricCounts::finalize() {
  precision = ratio(correct, predicted);
  recall = ratio(correct, gold);
  recall_undefined = gold == 0;
  f1 = f1_score(precision, recall);
  ign_precision = ratio(correct - correct_in_train, predicted - correct_in_train);
  ign_recall = recall;
  ign_f1 = f1_score(ign_precision, ign_recall);
}

const MetricCounts* EvalReport::relation(std::string_view name) const {
  for (const auto& [r, m] : per_relation)
    if (r == name) return &m;
  return nullptr;
}

double f1_score(double precision, double recall) noexcept {
  const double sum = precision + recall;
  return sum == 0.0 ? 0.0 : 2.0 * precision * recall / sum;
}

EvalReport score_facts(const std::set<FactKey>& predicted,
                       const std::set<FactKey>& gold,
                       const std::function<bool(const FactKey&)>& in_train,
                       std::span<const std::string> relations) {
  EvalReport report;
  std::map<std::string, MetricCounts> by_relation;
  for (const auto& r : relations) by_relation[r];
  for (const auto& g : gold) {
    ++report.overall.gold;
    ++by_relation[g.relation].gold;
  }
  for (const auto& p : predicted) {
    auto& rel = by_relation[p.relation];
    ++report.overall.predicted;
    ++rel.predicted;
    if (!gold.contains(p)) continue;
    ++report.overall.correct;
    ++rel.correct;
    if (in_train && in_train(p)) {
      ++report.overall.correct_in_train;
      ++rel.correct_in_train;
    }
  }
  report.overall.finalize();
  for (const auto& r : relations) {
    auto node = by_relation.extract(r);
    node.mapped().finalize();
    report.per_relation.emplace_back(r, node.mapped());
  }
  for (auto& [r, m] : by_relation) {
    m.finalize();
    report.per_relation.emplace_back(r, m);
  }
  return report;
}

EvalReport score_facts(const std::set<FactKey>& predicted,
                       const std::set<FactKey>& gold,
                       const std::set<FactKey>& train_facts,
                       std::span<const std::string> relations) {
  return score_facts(
      predicted, gold, [&](const FactKey& k) { return train_facts.contains(k); },
      relations);
}

TrainFactIndex::TrainFactIndex(std::span<const Document> train) {
  for (const auto& doc : train)
    for (const auto& f : doc.facts)
      for (const auto& hm : doc.entities.at(f.head).mentions)
        for (const auto& tm : doc.entities.at(f.tail).mentions)
          triples_.emplace(hm.surface, tm.surface, f.relation);
}

bool TrainFactIndex::contains(const Document& doc, std::size_t head,
                              std::size_t tail, const std::string& relation) const {
  if (triples_.empty()) return false;
  for (const auto& hm : doc.entities.at(head).mentions)
    for (const auto& tm : doc.entities.at(tail).mentions)
      if (triples_.contains({hm.surface, tm.surface, relation})) return true;
  return false;
}

std::set<FactKey> gold_facts(std::span<const Document> docs) {
  std::set<FactKey> out;
  for (const auto& d : docs)
    for (const auto& f : d.facts) out.insert({d.doc_id, f.head, f.tail, f.relation});
  return out;
}

std::vector<PredictionRecord> predictions_at(std::span<const DocumentScores> scores,
                                             const RelationSchema& schema,
                                             double threshold) {
  std::vector<PredictionRecord> out;
  for (const auto& doc : scores)
    for (const auto& p : predict(doc.pairs, threshold))
      out.push_back({doc.doc_id, p.subject, p.object, schema.name(p.relation),
                     p.probability});
  return out;
}

EvalReport evaluate_scores(std::span<const DocumentScores> scores,
                           std::span<const Document> docs,
                           const RelationSchema& schema,
                           const TrainFactIndex& train, double threshold) {
  if (scores.size() != docs.size())
    throw Error("evaluate_scores: " + std::to_string(scores.size()) +
                " score sets for " + std::to_string(docs.size()) + " documents");
  std::map<std::string, const Document*> by_id;
  for (const auto& d : docs) by_id.emplace(d.doc_id, &d);
  std::set<FactKey> predicted;
  for (const auto& p : predictions_at(scores, schema, threshold))
    predicted.insert({p.doc_id, p.head, p.tail, p.relation});
  const auto in_train = [&](const FactKey& k) {
    return train.contains(*by_id.at(k.doc_id), k.head, k.tail, k.relation);
  };
  return score_facts(predicted, gold_facts(docs), in_train, schema.names());
}

ThresholdChoice tune_threshold(std::span<const DocumentScores> scores,
                               std::span<const Document> docs,
                               const RelationSchema& schema) {
  const auto gold = gold_facts(docs);
  std::vector<std::pair<double, bool>> candidates;
  for (const auto& doc : scores)
    for (const auto& p : doc.pairs)
      for (std::size_t r = 0; r < p.probabilities.size(); ++r)
        candidates.emplace_back(
            p.probabilities[r],
            gold.contains({doc.doc_id, p.subject, p.object, schema.name(r)}));
  ThresholdChoice best;
  if (candidates.empty()) return best;
  std::sort(candidates.begin(), candidates.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });
  std::size_t predicted = 0, correct = 0;
  bool first = true;
  for (std::size_t i = 0; i < candidates.size();) {
    const double theta = candidates[i].first;
    for (; i < candidates.size() && candidates[i].first == theta; ++i) {
      ++predicted;
      if (candidates[i].second) ++correct;
    }
    const double f1 = f1_score(ratio(correct, predicted), ratio(correct, gold.size()));
    if (first || f1 > best.f1) best = {theta, f1};
    first = false;
  }
  return best;
}

void write_report(std::ostream& out, const EvalReport& report) {
  for (std::size_t i = 0; i < kColumns.size(); ++i)
    out << (i ? "\t" : "") << kColumns[i];
  out << '\n';
  write_row(out, "all", report.overall);
  for (const auto& [r, m] : report.per_relation) write_row(out, r, m);
}

EvalReport read_report(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || split_tabs(line) != kColumns)
    throw FormatError("report: missing or unexpected header");
  EvalReport report;
  bool seen_all = false;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split_tabs(line);
    if (cells.size() != kColumns.size())
      throw FormatError("report line " + std::to_string(line_no) + ": expected " +
                        std::to_string(kColumns.size()) + " columns");
    MetricCounts m;
    m.gold = parse_cell<std::size_t>(cells[1], line_no);
    m.predicted = parse_cell<std::size_t>(cells[2], line_no);
    m.correct = parse_cell<std::size_t>(cells[3], line_no);
    m.correct_in_train = parse_cell<std::size_t>(cells[4], line_no);
    m.precision = parse_cell<double>(cells[5], line_no);
    m.recall = parse_cell<double>(cells[6], line_no);
    m.f1 = parse_cell<double>(cells[7], line_no);
    m.ign_precision = parse_cell<double>(cells[8], line_no);
    m.ign_recall = parse_cell<double>(cells[9], line_no);
    m.ign_f1 = parse_cell<double>(cells[10], line_no);
    m.recall_undefined = parse_cell<int>(cells[11], line_no) != 0;
    if (cells[0] == "all" && !seen_all) {
      report.overall = m;
      seen_all = true;
    } else {
      report.per_relation.emplace_back(cells[0], m);
    }
  }
  if (!seen_all) throw FormatError("report: no 'all' row");
  return report;
}

void write_predictions(std::ostream& out, std::span<const PredictionRecord> records) {
  for (const auto& r : records) {
    const nlohmann::json j{{"doc_id", r.doc_id},
                           {"h", r.head},
                           {"t", r.tail},
                           {"r", r.relation},
                           {"probability", r.probability}};
    out << j.dump() << '\n';
  }
}

}  // namespace ssan
