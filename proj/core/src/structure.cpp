#include "ssan/structure.hpp"

#include <bit>
#include <istream>
#include <ostream>
#include <sstream>

#include "ssan/error.hpp"

namespace ssan {

std::string_view dependency_name(DependencyType t) noexcept {
  switch (t) {
    case DependencyType::NA: return "NA";
    case DependencyType::IntraNE: return "intraNE";
    case DependencyType::InterRelate: return "inter+relate";
    case DependencyType::IntraRelate: return "intra+relate";
    case DependencyType::InterCoref: return "inter+coref";
    case DependencyType::IntraCoref: return "intra+coref";
  }
  return "?";
}

std::optional<DependencyType> parse_dependency(std::string_view name) {
  static constexpr std::array<std::string_view, kDependencyCount> kEnumNames{
      "NA", "IntraNE", "InterRelate", "IntraRelate", "InterCoref",
      "IntraCoref"};
  for (auto t : kAllDependencies) {
    if (name == dependency_name(t) || name == kEnumNames[index_of(t)]) return t;
  }
  return std::nullopt;
}

std::size_t DependencySet::size() const noexcept {
  return static_cast<std::size_t>(std::popcount(bits_));
}

std::vector<DependencyType> DependencySet::members() const {
  std::vector<DependencyType> out;
  for (auto t : kAllDependencies)
    if (contains(t)) out.push_back(t);
  return out;
}

DependencySet parse_dependency_set(std::string_view text) {
  DependencySet set;
  if (text.empty() || text == "none") return set;
  if (text == "all") return DependencySet::all_structured();
  std::size_t at = 0;
  while (at <= text.size()) {
    const auto comma = text.find(',', at);
    const auto item = text.substr(at, comma == std::string_view::npos
                                          ? std::string_view::npos
                                          : comma - at);
    if (item.empty()) throw ConfigError("empty dependency name in '" + std::string(text) + "'");
    auto t = parse_dependency(item);
    if (!t) throw ConfigError("unknown dependency '" + std::string(item) + "'");
    set.insert(*t);
    if (comma == std::string_view::npos) break;
    at = comma + 1;
  }
  return set;
}

std::string format_dependency_set(const DependencySet& set) {
  std::string out;
  for (auto t : set.members()) {
    if (!out.empty()) out += ',';
    out += dependency_name(t);
  }
  return out.empty() ? "none" : out;
}

DependencyType classify_dependency(const TokenAnnotation& a,
                                   const TokenAnnotation& b) noexcept {
  const bool same_sentence = a.sentence_index == b.sentence_index;
  if (a.in_mention() && b.in_mention()) {
    const bool coref = a.entity_index == b.entity_index;
    if (same_sentence)
      return coref ? DependencyType::IntraCoref : DependencyType::IntraRelate;
    return coref ? DependencyType::InterCoref : DependencyType::InterRelate;
  }
  if (a.in_mention() != b.in_mention() && same_sentence)
    return DependencyType::IntraNE;
  return DependencyType::NA;
}

std::vector<TokenAnnotation> annotate_tokens(const Document& doc) {
  validate_document(doc);
  const auto offsets = doc.sentence_offsets();
  const auto sentence_of = doc.token_sentences();
  std::vector<TokenAnnotation> out(sentence_of.size());
  for (std::size_t t = 0; t < out.size(); ++t)
    out[t].sentence_index = sentence_of[t];
  std::size_t mention_id = 0;
  for (std::size_t e = 0; e < doc.entities.size(); ++e) {
    for (const auto& m : doc.entities[e].mentions) {
      for (auto t = Document::global_start(m, offsets);
           t < Document::global_end(m, offsets); ++t) {
        out[t].entity_index = e;
        out[t].mention_index = mention_id;
      }
      ++mention_id;
    }
  }
  return out;
}

StructureMatrix::StructureMatrix(std::string doc_id, std::size_t n)
    : doc_id_(std::move(doc_id)), n_(n), cells_(n * n, 0) {}

StructureMatrix::StructureMatrix(std::string doc_id, std::size_t n,
                                 std::vector<std::uint8_t> cells)
    : doc_id_(std::move(doc_id)), n_(n), cells_(std::move(cells)) {
  if (cells_.size() != n_ * n_)
    throw FormatError("structure grid for '" + doc_id_ + "' has " +
                      std::to_string(cells_.size()) + " cells, expected " +
                      std::to_string(n_ * n_));
  for (auto c : cells_)
    if (c >= kDependencyCount)
      throw FormatError("structure grid for '" + doc_id_ +
                        "' has invalid cell value " + std::to_string(c));
}

bool StructureMatrix::is_symmetric() const noexcept {
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = i + 1; j < n_; ++j)
      if (cells_[i * n_ + j] != cells_[j * n_ + i]) return false;
  return true;
}

bool StructureMatrix::all_na() const noexcept {
  for (auto c : cells_)
    if (c != 0) return false;
  return true;
}

StructureMatrix StructureMatrix::padded(std::size_t m) const {
  if (m < n_)
    throw Error("cannot pad a " + std::to_string(n_) + "-token structure to " +
                std::to_string(m));
  std::vector<std::uint8_t> cells(m * m, 0);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j) cells[i * m + j] = cells_[i * n_ + j];
  return StructureMatrix(doc_id_, m, std::move(cells));
}

StructureMatrix build_structure_matrix(const Document& doc) {
  const auto tokens = annotate_tokens(doc);
  const std::size_t n = tokens.size();
  std::vector<std::uint8_t> cells(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const auto t =
          static_cast<std::uint8_t>(classify_dependency(tokens[i], tokens[j]));
      cells[i * n + j] = t;
      cells[j * n + i] = t;
    }
  }
  return StructureMatrix(doc.doc_id, n, std::move(cells));
}

StructureMatrix apply_ablation(const StructureMatrix& m,
                               const DependencySet& excluded) {
  if (excluded.contains(DependencyType::NA))
    throw ConfigError("NA cannot be excluded from the structure");
  if (excluded.empty()) return m;
  auto cells = m.cells();
  for (auto& c : cells)
    if (excluded.contains(static_cast<DependencyType>(c))) c = 0;
  return StructureMatrix(m.doc_id(), m.size(), std::move(cells));
}

DependencyHistogram dependency_histogram(const StructureMatrix& m) noexcept {
  DependencyHistogram h{};
  for (auto c : m.cells()) ++h[c];
  return h;
}

namespace {
constexpr std::string_view kGridMagic = "SSANGRID 1";
}

void write_structure_grid(std::ostream& out, const StructureMatrix& m) {
  if (m.doc_id().find('\n') != std::string::npos)
    throw FormatError("doc_id contains a newline: cannot write grid header");
  out << kGridMagic << '\n' << m.doc_id() << '\n' << m.size() << '\n';
  out.write(reinterpret_cast<const char*>(m.cells().data()),
            static_cast<std::streamsize>(m.cells().size()));
  if (!out) throw FormatError("failed writing structure grid");
}

std::optional<StructureMatrix> read_structure_grid(std::istream& in) {
  std::string magic;
  if (!std::getline(in, magic)) return std::nullopt;
  if (magic != kGridMagic)
    throw FormatError("bad structure grid header '" + magic + "'");
  std::string doc_id, size_line;
  if (!std::getline(in, doc_id) || !std::getline(in, size_line))
    throw FormatError("truncated structure grid header");
  std::size_t n = 0;
  try {
    n = std::stoull(size_line);
  } catch (const std::exception&) {
    throw FormatError("bad structure grid size '" + size_line + "'");
  }
  std::vector<std::uint8_t> cells(n * n);
  in.read(reinterpret_cast<char*>(cells.data()),
          static_cast<std::streamsize>(cells.size()));
  if (static_cast<std::size_t>(in.gcount()) != cells.size())
    throw FormatError("truncated structure grid body for '" + doc_id + "'");
  return StructureMatrix(std::move(doc_id), n, std::move(cells));
}

}  // namespace ssan
