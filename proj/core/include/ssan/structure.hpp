#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ssan/document.hpp"

namespace ssan {

/// Token-pair dependency. The numeric values are the on-disk grid encoding.
enum class DependencyType : std::uint8_t {
  NA = 0,
  IntraNE = 1,
  InterRelate = 2,
  IntraRelate = 3,
  InterCoref = 4,
  IntraCoref = 5,
};

inline constexpr std::size_t kDependencyCount = 6;

inline constexpr std::array<DependencyType, kDependencyCount> kAllDependencies{
    DependencyType::NA,          DependencyType::IntraNE,
    DependencyType::InterRelate, DependencyType::IntraRelate,
    DependencyType::InterCoref,  DependencyType::IntraCoref};

/// The five types that carry transformation parameters.
inline constexpr std::array<DependencyType, kDependencyCount - 1>
    kStructuredDependencies{DependencyType::IntraNE,
                            DependencyType::InterRelate,
                            DependencyType::IntraRelate,
                            DependencyType::InterCoref,
                            DependencyType::IntraCoref};

constexpr std::size_t index_of(DependencyType t) noexcept {
  return static_cast<std::size_t>(t);
}

/// Canonical names: "intra+coref", "inter+coref", "intra+relate",
/// "inter+relate", "intraNE", "NA".
std::string_view dependency_name(DependencyType t) noexcept;
/// Accepts the canonical names and the enumerator spellings ("IntraCoref").
std::optional<DependencyType> parse_dependency(std::string_view name);

/// Small value set over DependencyType.
class DependencySet {
 public:
  DependencySet() = default;
  DependencySet(std::initializer_list<DependencyType> types) {
    for (auto t : types) insert(t);
  }

  static DependencySet all_structured() {
    DependencySet s;
    for (auto t : kStructuredDependencies) s.insert(t);
    return s;
  }

  void insert(DependencyType t) noexcept { bits_ |= bit(t); }
  bool contains(DependencyType t) const noexcept { return (bits_ & bit(t)) != 0; }
  bool empty() const noexcept { return bits_ == 0; }
  std::size_t size() const noexcept;
  bool is_subset_of(const DependencySet& other) const noexcept {
    return (bits_ & ~other.bits_) == 0;
  }
  std::vector<DependencyType> members() const;

  bool operator==(const DependencySet&) const = default;

 private:
  static constexpr std::uint8_t bit(DependencyType t) noexcept {
    return static_cast<std::uint8_t>(1u << index_of(t));
  }
  std::uint8_t bits_ = 0;
};

/// Comma-separated dependency names; empty string or "none" gives the empty set.
DependencySet parse_dependency_set(std::string_view text);
std::string format_dependency_set(const DependencySet& set);

struct TokenAnnotation {
  std::size_t sentence_index = 0;
  std::optional<std::size_t> entity_index;
  std::optional<std::size_t> mention_index;

  bool in_mention() const noexcept { return mention_index.has_value(); }
};

/// Decision table over two tokens of the same document.
DependencyType classify_dependency(const TokenAnnotation& a,
                                   const TokenAnnotation& b) noexcept;

/// Per-token annotation of a validated document. Mention indices enumerate
/// mentions entity by entity. Throws ValidationError on bad spans/overlaps.
std::vector<TokenAnnotation> annotate_tokens(const Document& doc);

/// Immutable n x n grid of dependency types over a document's tokens.
class StructureMatrix {
 public:
  StructureMatrix() = default;
  /// All-NA matrix.
  StructureMatrix(std::string doc_id, std::size_t n);
  /// Throws FormatError if cells.size() != n*n or a value is out of range.
  StructureMatrix(std::string doc_id, std::size_t n,
                  std::vector<std::uint8_t> cells);

  const std::string& doc_id() const noexcept { return doc_id_; }
  std::size_t size() const noexcept { return n_; }
  DependencyType at(std::size_t i, std::size_t j) const noexcept {
    return static_cast<DependencyType>(cells_[i * n_ + j]);
  }
  const std::vector<std::uint8_t>& cells() const noexcept { return cells_; }

  bool is_symmetric() const noexcept;
  bool all_na() const noexcept;
  /// Returns an m x m matrix (m >= n) whose extra rows and columns are NA.
  StructureMatrix padded(std::size_t m) const;

  bool operator==(const StructureMatrix&) const = default;

 private:
  std::string doc_id_;
  std::size_t n_ = 0;
  std::vector<std::uint8_t> cells_;
};

StructureMatrix build_structure_matrix(const Document& doc);

/// Replaces every cell whose type is in `excluded` with NA. Throws ConfigError
/// if `excluded` contains NA.
StructureMatrix apply_ablation(const StructureMatrix& m,
                               const DependencySet& excluded);

using DependencyHistogram = std::array<std::size_t, kDependencyCount>;

DependencyHistogram dependency_histogram(const StructureMatrix& m) noexcept;

/// Grid record: "SSANGRID 1\n<doc_id>\n<n>\n" followed by n*n bytes,
/// row-major, one DependencyType value per byte.
void write_structure_grid(std::ostream& out, const StructureMatrix& m);
/// Reads one record; returns nullopt at clean end of stream.
std::optional<StructureMatrix> read_structure_grid(std::istream& in);

}  // namespace ssan
