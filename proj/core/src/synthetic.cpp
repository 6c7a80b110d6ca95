#include "ssan/synthetic.hpp"

#include <algorithm>
#include <set>

#include "ssan/error.hpp"
#include "ssan/random.hpp"

namespace ssan {

void SyntheticSpec::validate() const {
  if (documents == 0) throw ConfigError("synthetic: documents must be positive");
  if (sentences_per_doc == 0)
    throw ConfigError("synthetic: sentences_per_doc must be positive");
  if (entities_per_doc < sentences_per_doc)
    throw ConfigError("synthetic: entities_per_doc (" +
                      std::to_string(entities_per_doc) +
                      ") must be at least sentences_per_doc (" +
                      std::to_string(sentences_per_doc) + ")");
  if (entities_per_doc > name_vocab)
    throw ConfigError("synthetic: more entities per document than entity names");
  if (bridges_per_doc > entities_per_doc)
    throw ConfigError("synthetic: more bridges than entities");
  if (bridges_per_doc > 0 && sentences_per_doc < 2)
    throw ConfigError("synthetic: bridges need at least two sentences");
  if (filler_vocab == 0) throw ConfigError("synthetic: filler_vocab must be positive");
  if (max_name_tokens == 0)
    throw ConfigError("synthetic: max_name_tokens must be positive");
  if (pronoun_rate < 0.0 || pronoun_rate > 1.0)
    throw ConfigError("synthetic: pronoun_rate must lie in [0, 1]");
  if (direct_relation.empty() || bridge_relation.empty() ||
      direct_relation == bridge_relation)
    throw ConfigError("synthetic: relation names must be distinct and non-empty");
  if (entity_types.empty()) throw ConfigError("synthetic: no entity types");
}

std::vector<RelationFact> derive_synthetic_facts(const Document& doc,
                                                 const std::string& direct,
                                                 const std::string& bridge) {
  const std::size_t n = doc.entities.size();
  std::vector<std::set<std::size_t>> sentences_of(n);
  for (std::size_t e = 0; e < n; ++e)
    for (const auto& m : doc.entities[e].mentions)
      sentences_of[e].insert(m.sentence_index);

  std::vector<std::vector<bool>> shares(n, std::vector<bool>(n, false));
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) {
      if (a == b) continue;
      for (auto s : sentences_of[a])
        if (sentences_of[b].contains(s)) {
          shares[a][b] = true;
          break;
        }
    }

  std::vector<RelationFact> facts;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) {
      if (a == b) continue;
      if (shares[a][b]) {
        facts.push_back({a, b, direct});
        continue;
      }
      for (std::size_t c = 0; c < n; ++c)
        if (c != a && c != b && shares[a][c] && shares[b][c]) {
          facts.push_back({a, b, bridge});
          break;
        }
    }
  std::sort(facts.begin(), facts.end());
  return facts;
}

namespace {

struct Slot {
  std::size_t entity;
  bool pronoun;
};

const std::vector<std::string> kPronouns{"it", "they", "he", "she"};

}  // namespace

std::vector<Document> generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  std::vector<Document> docs;
  docs.reserve(spec.documents);

  for (std::size_t d = 0; d < spec.documents; ++d) {
    const std::size_t ne = spec.entities_per_doc;
    const std::size_t ns = spec.sentences_per_doc;

    // Distinct names per entity.
    std::vector<std::size_t> pool(spec.name_vocab);
    for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = i;
    rng.shuffle(pool);
    std::vector<std::vector<std::string>> names(ne);
    std::size_t next_name = 0;
    for (std::size_t e = 0; e < ne; ++e) {
      const auto tokens = rng.between(1, spec.max_name_tokens);
      for (std::size_t t = 0; t < tokens; ++t) {
        // Extra name tokens reuse the pool cyclically once it runs out.
        names[e].push_back("n" + std::to_string(pool[next_name % pool.size()]));
        ++next_name;
      }
    }

    // Home sentences: a shuffled round-robin gives every sentence an entity.
    std::vector<std::size_t> home(ne);
    for (std::size_t e = 0; e < ne; ++e) home[e] = e % ns;
    rng.shuffle(home);

    std::vector<std::vector<Slot>> slots(ns);
    for (std::size_t e = 0; e < ne; ++e) slots[home[e]].push_back({e, false});

    std::vector<std::size_t> candidates(ne);
    for (std::size_t e = 0; e < ne; ++e) candidates[e] = e;
    rng.shuffle(candidates);
    for (std::size_t b = 0; b < spec.bridges_per_doc; ++b) {
      const auto e = candidates[b];
      auto target = rng.below(ns - 1);
      if (target >= home[e]) ++target;
      slots[target].push_back({e, rng.bernoulli(spec.pronoun_rate)});
    }

    Document doc;
    doc.doc_id = "synth-" + std::to_string(spec.seed) + "-" + std::to_string(d);
    doc.entities.resize(ne);
    for (std::size_t e = 0; e < ne; ++e) {
      doc.entities[e].ordinal = e;
      doc.entities[e].type = spec.entity_types[rng.below(spec.entity_types.size())];
    }

    auto filler = [&](std::vector<std::string>& sentence, std::size_t lo) {
      const auto count = rng.between(lo, spec.max_filler);
      for (std::size_t i = 0; i < count; ++i)
        sentence.push_back("w" + std::to_string(rng.below(spec.filler_vocab)));
    };

    for (std::size_t s = 0; s < ns; ++s) {
      rng.shuffle(slots[s]);
      std::vector<std::string> sentence;
      filler(sentence, 0);
      for (const auto& slot : slots[s]) {
        Mention m;
        m.sentence_index = s;
        m.start = sentence.size();
        if (slot.pronoun) {
          const auto& p = kPronouns[rng.below(kPronouns.size())];
          sentence.push_back(p);
          m.surface = p;
        } else {
          for (const auto& tok : names[slot.entity]) {
            if (!m.surface.empty()) m.surface += ' ';
            m.surface += tok;
            sentence.push_back(tok);
          }
        }
        m.end = sentence.size();
        doc.entities[slot.entity].mentions.push_back(std::move(m));
        filler(sentence, 1);
      }
      sentence.push_back(".");
      doc.sentences.push_back(std::move(sentence));
    }

    doc.facts = derive_synthetic_facts(doc, spec.direct_relation,
                                       spec.bridge_relation);
    validate_document(doc);
    docs.push_back(std::move(doc));
  }
  return docs;
}

}  // namespace ssan
