#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ssan/document.hpp"

namespace ssan {

/// Word -> index map with reserved padding (0) and unknown (1) slots. Kept
/// words are indexed in order of first occurrence.
class Vocabulary {
 public:
  static constexpr std::size_t kPad = 0;
  static constexpr std::size_t kUnknown = 1;

  Vocabulary();
  static Vocabulary build(std::span<const Document> docs, std::size_t min_count);
  /// Words from index 2 onward, one per line.
  static Vocabulary from_text(std::string_view text);
  std::string to_text() const;

  std::size_t index(std::string_view word) const;
  const std::string& word(std::size_t i) const { return words_.at(i); }
  std::size_t size() const noexcept { return words_.size(); }
  bool contains(std::string_view word) const;

 private:
  void add(std::string word);

  std::vector<std::string> words_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Closed set of entity types; index 0 is reserved for non-entity tokens.
class TypeInventory {
 public:
  static TypeInventory build(std::span<const Document> docs);
  static TypeInventory from_text(std::string_view text);
  std::string to_text() const;

  /// Throws ConfigError for a type outside the inventory.
  std::size_t index(std::string_view type) const;
  /// Number of embedding rows, including the none slot.
  std::size_t size() const noexcept { return types_.size() + 1; }
  const std::vector<std::string>& types() const noexcept { return types_; }

 private:
  std::vector<std::string> types_;
};

}  // namespace ssan
