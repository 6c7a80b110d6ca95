#include "ssan/ablation.hpp"

#include <charconv>
#include <ostream>

#include "ssan/error.hpp"
#include "ssan/trainer.hpp"

namespace ssan {
namespace {

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

const AblationRow* AblationTable::row(std::string_view label) const {
  for (const auto& r : rows)
    if (r.label == label) return &r;
  return nullptr;
}

AblationRow run_row(std::string label, const ModelConfig& config,
                    std::span<const Document> train_docs,
                    std::span<const Document> dev_docs) {
  const auto result = train(config, train_docs, dev_docs);
  const auto model = RelationModel::from_checkpoint(result.best);
  const auto report =
      evaluate(model, dev_docs, TrainFactIndex(train_docs), result.threshold);
  return {std::move(label), config, report};
}

AblationTable ablate_dependencies(const ModelConfig& base,
                                  std::span<const Document> train_docs,
                                  std::span<const Document> dev_docs) {
  if (base.mode == TransformationMode::None)
    throw ConfigError("dependency ablation needs a structured mode");
  AblationTable table{"dependencies", {}};
  auto full = base;
  full.exclude = {};
  table.rows.push_back(run_row("full", full, train_docs, dev_docs));
  for (auto s : kStructuredDependencies) {
    auto c = full;
    c.exclude = {s};
    table.rows.push_back(
        run_row("-" + std::string(dependency_name(s)), c, train_docs, dev_docs));
  }
  auto none = full;
  none.exclude = DependencySet::all_structured();
  table.rows.push_back(run_row("-all", none, train_docs, dev_docs));
  return table;
}

std::vector<std::pair<std::string, ModelConfig>> bias_term_configs(const ModelConfig& base) {
  const auto with = [&](TransformationMode mode, std::string_view terms) {
    auto c = base;
    c.mode = mode;
    c.terms = mode == TransformationMode::None ? std::optional<BiasTerms>{}
                                               : parse_bias_terms(terms);
    return c;
  };
  using M = TransformationMode;
  return {{"baseline", with(M::None, "")},
          {"prior", with(M::Decomp, "prior")},
          {"key", with(M::Decomp, "key")},
          {"query", with(M::Decomp, "query")},
          {"decomp", with(M::Decomp, "query,key,prior")},
          {"biaffine", with(M::Biaffine, "biaffine")},
          {"biaffine+prior", with(M::Biaffine, "biaffine,prior")}};
}

AblationTable ablate_bias_terms(const ModelConfig& base,
                                std::span<const Document> train_docs,
                                std::span<const Document> dev_docs) {
  AblationTable table{"bias-terms", {}};
  for (const auto& [label, config] : bias_term_configs(base))
    table.rows.push_back(run_row(label, config, train_docs, dev_docs));
  return table;
}

AblationTable ablate_layers(const ModelConfig& base, std::span<const std::size_t> top_k,
                            std::span<const Document> train_docs,
                            std::span<const Document> dev_docs) {
  AblationTable table{"layers", {}};
  for (auto k : top_k) {
    if (k > base.layers)
      throw ConfigError("top-" + std::to_string(k) + " exceeds " +
                        std::to_string(base.layers) + " layers");
    auto c = base;
    c.structured_layers = "top:" + std::to_string(k);
    table.rows.push_back(run_row(std::to_string(k), c, train_docs, dev_docs));
  }
  return table;
}

void write_ablation_table(std::ostream& out, const AblationTable& table) {
  std::vector<std::string> relations;
  if (!table.rows.empty())
    for (const auto& [r, m] : table.rows.front().report.per_relation) relations.push_back(r);
  out << "row\tprecision\trecall\tf1\tign_f1";
  for (const auto& r : relations) out << "\trecall:" << r;
  out << '\n';
  for (const auto& row : table.rows) {
    const auto& m = row.report.overall;
    out << row.label << '\t' << format_double(m.precision) << '\t'
        << format_double(m.recall) << '\t' << format_double(m.f1) << '\t'
        << format_double(m.ign_f1);
    for (const auto& r : relations) {
      const auto* rm = row.report.relation(r);
      out << '\t' << format_double(rm ? rm->recall : 0.0);
    }
    out << '\n';
  }
}

}  // namespace ssan
