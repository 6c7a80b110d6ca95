#include "ssan/document.hpp"

#include <optional>
#include <string>

#include "ssan/error.hpp"

namespace ssan {

std::size_t Document::token_count() const noexcept {
  std::size_t n = 0;
  for (const auto& s : sentences) n += s.size();
  return n;
}

std::vector<std::size_t> Document::sentence_offsets() const {
  std::vector<std::size_t> offsets;
  offsets.reserve(sentences.size());
  std::size_t at = 0;
  for (const auto& s : sentences) {
    offsets.push_back(at);
    at += s.size();
  }
  return offsets;
}

std::vector<std::string> Document::tokens() const {
  std::vector<std::string> out;
  out.reserve(token_count());
  for (const auto& s : sentences) out.insert(out.end(), s.begin(), s.end());
  return out;
}

std::vector<std::size_t> Document::token_sentences() const {
  std::vector<std::size_t> out;
  out.reserve(token_count());
  for (std::size_t s = 0; s < sentences.size(); ++s)
    out.insert(out.end(), sentences[s].size(), s);
  return out;
}

namespace {

std::string mention_label(std::size_t entity, std::size_t mention,
                          const Mention& m) {
  return "entity " + std::to_string(entity) + " mention " +
         std::to_string(mention) + " ('" + m.surface + "', sent " +
         std::to_string(m.sentence_index) + ", pos [" +
         std::to_string(m.start) + "," + std::to_string(m.end) + "))";
}

}  // namespace

void validate_document(const Document& doc) {
  const auto offsets = doc.sentence_offsets();
  struct Owner {
    std::size_t entity;
    std::size_t mention;
  };
  std::vector<std::optional<Owner>> owner(doc.token_count());

  for (std::size_t e = 0; e < doc.entities.size(); ++e) {
    const auto& entity = doc.entities[e];
    if (entity.mentions.empty())
      throw ValidationError(doc.doc_id,
                            "entity " + std::to_string(e) + " has no mentions");
    for (std::size_t k = 0; k < entity.mentions.size(); ++k) {
      const auto& m = entity.mentions[k];
      if (m.sentence_index >= doc.sentences.size())
        throw ValidationError(doc.doc_id, mention_label(e, k, m) +
                                              ": sentence index out of range");
      if (m.end <= m.start)
        throw ValidationError(doc.doc_id,
                              mention_label(e, k, m) + ": empty or inverted span");
      if (m.end > doc.sentences[m.sentence_index].size())
        throw ValidationError(doc.doc_id, mention_label(e, k, m) +
                                              ": span exceeds sentence length");
      for (std::size_t t = Document::global_start(m, offsets);
           t < Document::global_end(m, offsets); ++t) {
        if (owner[t]) {
          const auto& prev =
              doc.entities[owner[t]->entity].mentions[owner[t]->mention];
          throw ValidationError(
              doc.doc_id, mention_label(e, k, m) + " overlaps " +
                              mention_label(owner[t]->entity,
                                            owner[t]->mention, prev));
        }
        owner[t] = Owner{e, k};
      }
    }
  }

  for (std::size_t f = 0; f < doc.facts.size(); ++f) {
    const auto& fact = doc.facts[f];
    if (fact.head >= doc.entities.size() || fact.tail >= doc.entities.size())
      throw ValidationError(doc.doc_id, "fact " + std::to_string(f) +
                                            " references an unknown entity");
    if (fact.head == fact.tail)
      throw ValidationError(doc.doc_id, "fact " + std::to_string(f) +
                                            " relates an entity to itself");
  }
}

}  // namespace ssan
