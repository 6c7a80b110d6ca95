#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>

#include "ssan/document.hpp"

namespace ssan {

struct CorpusStats {
  std::size_t documents = 0;
  std::size_t entities = 0;
  std::size_t mentions = 0;
  std::size_t mention_sentences = 0;  // sentences with at least one mention
  std::size_t facts = 0;
  std::size_t relation_types = 0;
  double entities_per_doc = 0.0;
  double mentions_per_doc = 0.0;
  /// Mentions over mention-bearing sentences; mention-free sentences are
  /// excluded from the denominator.
  double mentions_per_sentence = 0.0;
};

CorpusStats corpus_stats(std::span<const Document> docs);

/// Two-line TSV: header then values.
void write_corpus_stats(std::ostream& out, const CorpusStats& stats);

}  // namespace ssan
