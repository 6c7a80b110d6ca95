#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ssan/config.hpp"
#include "ssan/document.hpp"
#include "ssan/metrics.hpp"

namespace ssan {

struct AblationRow {
  std::string label;
  ModelConfig config;
  EvalReport report;
};

struct AblationTable {
  std::string title;
  std::vector<AblationRow> rows;

  const AblationRow* row(std::string_view label) const;
};

/// Trains `config` and evaluates its best checkpoint on `dev_docs`.
AblationRow run_row(std::string label, const ModelConfig& config,
                    std::span<const Document> train_docs,
                    std::span<const Document> dev_docs);

/// Full model, one row per excluded dependency ("-intra+coref", ...), then
/// "-all". Requires a non-None mode.
AblationTable ablate_dependencies(const ModelConfig& base,
                                  std::span<const Document> train_docs,
                                  std::span<const Document> dev_docs);

/// Configurations of the bias-term study, in row order:
/// baseline, prior, key, query, decomp (all three), biaffine, biaffine+prior.
std::vector<std::pair<std::string, ModelConfig>> bias_term_configs(const ModelConfig& base);

AblationTable ablate_bias_terms(const ModelConfig& base,
                                std::span<const Document> train_docs,
                                std::span<const Document> dev_docs);

/// One run per k in `top_k` with structure imposed on the top-k blocks only.
AblationTable ablate_layers(const ModelConfig& base, std::span<const std::size_t> top_k,
                            std::span<const Document> train_docs,
                            std::span<const Document> dev_docs);

/// Header "row precision recall f1 ign_f1 recall:<relation>..." then one line
/// per row.
void write_ablation_table(std::ostream& out, const AblationTable& table);

}  // namespace ssan
