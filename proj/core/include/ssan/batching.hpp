#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ssan/document.hpp"
#include "ssan/structure.hpp"
#include "ssan/vocab.hpp"

namespace ssan {

/// Cuts a document to its first `max_len` tokens. Mentions crossing the cut
/// are dropped; entities left without mentions are removed (survivors keep
/// their ordinal) and facts touching them are dropped. Each loss appends a
/// line to `warnings`.
Document truncate_document(const Document& doc, std::size_t max_len,
                           std::vector<std::string>* warnings = nullptr);

/// Model-ready view of one (possibly truncated) document.
struct EncodedDocument {
  Document doc;
  std::vector<std::size_t> token_ids;
  std::vector<std::size_t> type_ids;       // 0 = not in a mention
  std::vector<std::size_t> coref_ids;      // 0 = not in a mention, else ordinal + 1
  StructureMatrix structure;               // after ablation
  std::vector<std::vector<std::size_t>> entity_tokens;  // global token indices
  std::vector<std::size_t> entity_anchors; // earliest mention start per entity

  std::size_t length() const noexcept { return token_ids.size(); }
  std::size_t entity_count() const noexcept { return entity_tokens.size(); }
};

struct EncodeOptions {
  std::size_t max_len = 512;
  DependencySet excluded;
};

EncodedDocument encode_document(const Document& doc, const Vocabulary& vocab,
                                const TypeInventory& types,
                                const EncodeOptions& options,
                                std::vector<std::string>* warnings = nullptr);

std::vector<EncodedDocument> encode_corpus(std::span<const Document> docs,
                                           const Vocabulary& vocab,
                                           const TypeInventory& types,
                                           const EncodeOptions& options,
                                           std::vector<std::string>* warnings = nullptr);

/// Right-padded group of encoded documents.
struct Batch {
  std::size_t length = 0;
  std::vector<std::size_t> doc_indices;     // into the encoded corpus
  std::vector<std::size_t> token_grid;      // size() x length, pad = 0
  std::vector<std::uint8_t> pad_mask;       // size() x length, 1 = padding
  std::vector<StructureMatrix> structures;  // padded with NA

  std::size_t size() const noexcept { return doc_indices.size(); }
  std::span<const std::uint8_t> padding(std::size_t row) const {
    return std::span(pad_mask).subspan(row * length, length);
  }
};

/// Seeded shuffle, then consecutive groups of `batch_size`.
std::vector<Batch> make_batches(std::span<const EncodedDocument> docs,
                                std::size_t batch_size, std::uint64_t seed);

}  // namespace ssan
