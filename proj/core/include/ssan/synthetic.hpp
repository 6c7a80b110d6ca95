#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "ssan/document.hpp"

namespace ssan {

/// Parameters of the synthetic bridge corpus.
///
/// Every sentence hosts `entities_per_doc / sentences_per_doc` named entities
/// (at least one). A bridge re-mentions an entity in a second sentence, as a
/// pronoun with probability `pronoun_rate`. Facts follow the structural rule
/// implemented by derive_synthetic_facts.
struct SyntheticSpec {
  std::size_t documents = 30;
  std::size_t filler_vocab = 40;
  std::size_t name_vocab = 300;
  std::size_t entities_per_doc = 6;
  std::size_t sentences_per_doc = 3;
  std::size_t bridges_per_doc = 1;
  double pronoun_rate = 1.0;
  std::size_t max_filler = 3;
  std::size_t max_name_tokens = 2;
  std::uint64_t seed = 1;
  std::string direct_relation = "r0";
  std::string bridge_relation = "r1";
  std::vector<std::string> entity_types{"PER", "ORG", "LOC", "MISC"};

  /// Throws ConfigError for inconsistent settings.
  void validate() const;
};

/// Structural relation rule over a document:
///   direct (r0): the two entities have mentions in a common sentence;
///   bridge (r1): they share no sentence, but some third entity shares a
///   sentence with each of them (a coreference bridge across sentences).
/// Both directions of each pair are emitted, sorted by (head, tail, relation).
std::vector<RelationFact> derive_synthetic_facts(const Document& doc,
                                                 const std::string& direct,
                                                 const std::string& bridge);

std::vector<Document> generate_synthetic(const SyntheticSpec& spec);

}  // namespace ssan
