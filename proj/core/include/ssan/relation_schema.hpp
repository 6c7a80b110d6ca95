#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ssan/document.hpp"

namespace ssan {

/// Ordered set of relation names (size M). Index order is the column order
/// of the classifier.
class RelationSchema {
 public:
  RelationSchema() = default;
  /// Throws ConfigError when empty or names repeat.
  explicit RelationSchema(std::vector<std::string> names);

  /// Sorted unique relation names appearing in the corpus facts.
  static RelationSchema from_corpus(std::span<const Document> docs);
  /// One relation name per line; blank lines and '#' comments skipped.
  static RelationSchema load(const std::filesystem::path& path);

  std::size_t size() const noexcept { return names_.size(); }
  const std::vector<std::string>& names() const noexcept { return names_; }
  const std::string& name(std::size_t i) const { return names_.at(i); }
  std::optional<std::size_t> index(std::string_view name) const;

  std::string to_text() const;
  static RelationSchema from_text(std::string_view text);

  bool operator==(const RelationSchema&) const = default;

 private:
  std::vector<std::string> names_;
};

}  // namespace ssan
