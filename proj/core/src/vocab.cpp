#include "ssan/vocab.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "ssan/error.hpp"

namespace ssan {

Vocabulary::Vocabulary() {
  add("<pad>");
  add("<unk>");
}

void Vocabulary::add(std::string word) {
  index_.emplace(word, words_.size());
  words_.push_back(std::move(word));
}

Vocabulary Vocabulary::build(std::span<const Document> docs,
                             std::size_t min_count) {
  std::unordered_map<std::string, std::size_t> counts;
  std::vector<std::string> order;
  for (const auto& d : docs)
    for (const auto& s : d.sentences)
      for (const auto& w : s)
        if (counts[w]++ == 0) order.push_back(w);
  Vocabulary v;
  for (auto& w : order)
    if (counts[w] >= min_count && !v.contains(w)) v.add(std::move(w));
  return v;
}

Vocabulary Vocabulary::from_text(std::string_view text) {
  Vocabulary v;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (v.contains(line)) throw FormatError("vocabulary repeats '" + line + "'");
    v.add(line);
  }
  return v;
}

std::string Vocabulary::to_text() const {
  std::string out;
  for (std::size_t i = 2; i < words_.size(); ++i) out += words_[i] + "\n";
  return out;
}

std::size_t Vocabulary::index(std::string_view word) const {
  const auto it = index_.find(std::string(word));
  return it == index_.end() ? kUnknown : it->second;
}

bool Vocabulary::contains(std::string_view word) const {
  return index_.contains(std::string(word));
}

TypeInventory TypeInventory::build(std::span<const Document> docs) {
  std::set<std::string> types;
  for (const auto& d : docs)
    for (const auto& e : d.entities) types.insert(e.type);
  TypeInventory inv;
  inv.types_.assign(types.begin(), types.end());
  return inv;
}

TypeInventory TypeInventory::from_text(std::string_view text) {
  TypeInventory inv;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) inv.types_.push_back(line);
  return inv;
}

std::string TypeInventory::to_text() const {
  std::string out;
  for (const auto& t : types_) out += t + "\n";
  return out;
}

std::size_t TypeInventory::index(std::string_view type) const {
  const auto it = std::find(types_.begin(), types_.end(), type);
  if (it == types_.end())
    throw ConfigError("entity type '" + std::string(type) +
                      "' is not in the type inventory");
  return static_cast<std::size_t>(it - types_.begin()) + 1;
}

}  // namespace ssan
