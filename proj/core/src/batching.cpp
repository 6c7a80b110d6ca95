#include "ssan/batching.hpp"

#include <algorithm>
#include <numeric>
#include <optional>

#include "ssan/error.hpp"
#include "ssan/random.hpp"

namespace ssan {

Document truncate_document(const Document& doc, std::size_t max_len,
                           std::vector<std::string>* warnings) {
  if (doc.token_count() <= max_len) return doc;
  auto warn = [&](const std::string& msg) {
    if (warnings) warnings->push_back(doc.doc_id + ": " + msg);
  };

  Document out;
  out.doc_id = doc.doc_id;
  std::size_t remaining = max_len;
  for (const auto& s : doc.sentences) {
    if (remaining == 0) break;
    const auto take = std::min(remaining, s.size());
    out.sentences.emplace_back(s.begin(), s.begin() + static_cast<long>(take));
    remaining -= take;
  }
  warn("truncated from " + std::to_string(doc.token_count()) + " to " +
       std::to_string(max_len) + " tokens");

  std::vector<std::optional<std::size_t>> remap(doc.entities.size());
  for (std::size_t e = 0; e < doc.entities.size(); ++e) {
    const auto& entity = doc.entities[e];
    Entity kept{entity.ordinal, entity.type, {}};
    for (const auto& m : entity.mentions) {
      const bool inside = m.sentence_index < out.sentences.size() &&
                          m.end <= out.sentences[m.sentence_index].size();
      if (inside)
        kept.mentions.push_back(m);
      else
        warn("dropped mention '" + m.surface + "' of entity " +
             std::to_string(entity.ordinal) + " beyond the cut");
    }
    if (kept.mentions.empty()) {
      warn("dropped entity " + std::to_string(entity.ordinal) +
           " (no mentions left)");
      continue;
    }
    remap[e] = out.entities.size();
    out.entities.push_back(std::move(kept));
  }
  for (const auto& f : doc.facts) {
    if (remap[f.head] && remap[f.tail]) {
      out.facts.push_back(RelationFact{*remap[f.head], *remap[f.tail], f.relation});
    } else {
      warn("dropped fact (" + std::to_string(doc.entities[f.head].ordinal) +
           ", " + std::to_string(doc.entities[f.tail].ordinal) + ", " +
           f.relation + ")");
    }
  }
  return out;
}

EncodedDocument encode_document(const Document& source, const Vocabulary& vocab,
                                const TypeInventory& types,
                                const EncodeOptions& options,
                                std::vector<std::string>* warnings) {
  EncodedDocument enc;
  enc.doc = truncate_document(source, options.max_len, warnings);
  const auto& doc = enc.doc;
  const auto n = doc.token_count();
  const auto offsets = doc.sentence_offsets();

  enc.token_ids.reserve(n);
  for (const auto& s : doc.sentences)
    for (const auto& w : s) enc.token_ids.push_back(vocab.index(w));
  enc.type_ids.assign(n, 0);
  enc.coref_ids.assign(n, 0);
  enc.structure =
      apply_ablation(build_structure_matrix(doc), options.excluded);

  for (const auto& entity : doc.entities) {
    const auto type = types.index(entity.type);
    std::vector<std::size_t> tokens;
    std::size_t anchor = n;
    for (const auto& m : entity.mentions) {
      const auto start = Document::global_start(m, offsets);
      anchor = std::min(anchor, start);
      for (auto t = start; t < Document::global_end(m, offsets); ++t) {
        tokens.push_back(t);
        enc.type_ids[t] = type;
        enc.coref_ids[t] = entity.ordinal + 1;
      }
    }
    enc.entity_tokens.push_back(std::move(tokens));
    enc.entity_anchors.push_back(anchor);
  }
  return enc;
}

std::vector<EncodedDocument> encode_corpus(std::span<const Document> docs,
                                           const Vocabulary& vocab,
                                           const TypeInventory& types,
                                           const EncodeOptions& options,
                                           std::vector<std::string>* warnings) {
  std::vector<EncodedDocument> out;
  out.reserve(docs.size());
  for (const auto& d : docs)
    out.push_back(encode_document(d, vocab, types, options, warnings));
  return out;
}

std::vector<Batch> make_batches(std::span<const EncodedDocument> docs,
                                std::size_t batch_size, std::uint64_t seed) {
  if (batch_size == 0) throw ConfigError("batch size must be positive");
  std::vector<std::size_t> order(docs.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order);

  std::vector<Batch> batches;
  for (std::size_t at = 0; at < order.size(); at += batch_size) {
    Batch b;
    const auto end = std::min(order.size(), at + batch_size);
    b.doc_indices.assign(order.begin() + static_cast<long>(at),
                         order.begin() + static_cast<long>(end));
    for (auto i : b.doc_indices) b.length = std::max(b.length, docs[i].length());
    b.token_grid.assign(b.size() * b.length, Vocabulary::kPad);
    b.pad_mask.assign(b.size() * b.length, 1);
    for (std::size_t r = 0; r < b.size(); ++r) {
      const auto& d = docs[b.doc_indices[r]];
      std::copy(d.token_ids.begin(), d.token_ids.end(),
                b.token_grid.begin() + static_cast<long>(r * b.length));
      std::fill_n(b.pad_mask.begin() + static_cast<long>(r * b.length),
                  d.length(), 0);
      b.structures.push_back(d.structure.padded(b.length));
    }
    batches.push_back(std::move(b));
  }
  return batches;
}

}  // namespace ssan
