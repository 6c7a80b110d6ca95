#include "ssan/corpus_stats.hpp"

#include <ostream>
#include <set>
#include <string>

namespace ssan {

CorpusStats corpus_stats(std::span<const Document> docs) {
  CorpusStats s;
  std::set<std::string> relations;
  s.documents = docs.size();
  for (const auto& d : docs) {
    s.entities += d.entities.size();
    std::set<std::size_t> bearing;
    for (const auto& e : d.entities) {
      s.mentions += e.mentions.size();
      for (const auto& m : e.mentions) bearing.insert(m.sentence_index);
    }
    s.mention_sentences += bearing.size();
    s.facts += d.facts.size();
    for (const auto& f : d.facts) relations.insert(f.relation);
  }
  s.relation_types = relations.size();
  if (s.documents > 0) {
    s.entities_per_doc = static_cast<double>(s.entities) / static_cast<double>(s.documents);
    s.mentions_per_doc = static_cast<double>(s.mentions) / static_cast<double>(s.documents);
  }
  if (s.mention_sentences > 0)
    s.mentions_per_sentence =
        static_cast<double>(s.mentions) / static_cast<double>(s.mention_sentences);
  return s;
}

void write_corpus_stats(std::ostream& out, const CorpusStats& s) {
  out << "documents\tentities_per_doc\tmentions_per_doc\tmentions_per_sentence"
         "\trelation_types\tfacts\tentities\tmentions\tmention_sentences\n";
  out << s.documents << '\t' << s.entities_per_doc << '\t' << s.mentions_per_doc
      << '\t' << s.mentions_per_sentence << '\t' << s.relation_types << '\t'
      << s.facts << '\t' << s.entities << '\t' << s.mentions << '\t'
      << s.mention_sentences << '\n';
}

}  // namespace ssan
