#pragma once

#include <compare>
#include <cstddef>
#include <string>
#include <vector>

namespace ssan {

/// A contiguous token span inside one sentence; [start, end) is sentence-local.
struct Mention {
  std::size_t sentence_index = 0;
  std::size_t start = 0;
  std::size_t end = 0;
  std::string surface;

  std::size_t length() const noexcept { return end - start; }
};

/// A set of coreferential mentions. `ordinal` is the entity's position in the
/// source vertexSet and survives truncation; the entity's position in
/// Document::entities is what facts and the model index by.
struct Entity {
  std::size_t ordinal = 0;
  std::string type;
  std::vector<Mention> mentions;
};

struct RelationFact {
  std::size_t head = 0;
  std::size_t tail = 0;
  std::string relation;

  auto operator<=>(const RelationFact&) const = default;
};

struct Document {
  std::string doc_id;
  std::vector<std::vector<std::string>> sentences;
  std::vector<Entity> entities;
  std::vector<RelationFact> facts;

  std::size_t token_count() const noexcept;
  /// Global index of the first token of every sentence.
  std::vector<std::size_t> sentence_offsets() const;
  /// Flattened token sequence.
  std::vector<std::string> tokens() const;
  /// Sentence index of every global token.
  std::vector<std::size_t> token_sentences() const;
  /// Global [start, end) of a mention, given precomputed sentence offsets.
  static std::size_t global_start(const Mention& m,
                                  const std::vector<std::size_t>& offsets) {
    return offsets[m.sentence_index] + m.start;
  }
  static std::size_t global_end(const Mention& m,
                                const std::vector<std::size_t>& offsets) {
    return offsets[m.sentence_index] + m.end;
  }
};

/// Throws ValidationError unless every mention lies inside its sentence with
/// end > start, no token belongs to two mentions, every entity has a mention,
/// and every fact references two distinct valid entities.
void validate_document(const Document& doc);

}  // namespace ssan
