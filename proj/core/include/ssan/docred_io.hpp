#pragma once

#include <filesystem>
#include <iosfwd>
#include <string_view>
#include <vector>

#include "ssan/document.hpp"
#include "ssan/relation_schema.hpp"

namespace ssan {

/// Parses DocRED-layout JSON: either one array of documents or one document
/// per line. Fields: title, sents, vertexSet[{name, sent_id, pos, type}],
/// labels[{h, t, r}]; evidence and any other fields are ignored. The title
/// becomes the doc_id. When `schema` is given, labels with relations outside
/// it are rejected. Errors name the source, document and location.
std::vector<Document> parse_corpus_text(std::string_view text,
                                        const RelationSchema* schema = nullptr,
                                        std::string_view source = "<memory>");
std::vector<Document> parse_corpus(const std::filesystem::path& path,
                                   const RelationSchema* schema = nullptr);

/// Writes a JSON array in the same layout (pretty-printed when indent >= 0).
void write_corpus(std::ostream& out, const std::vector<Document>& docs,
                  int indent = -1);
void save_corpus(const std::filesystem::path& path,
                 const std::vector<Document>& docs);

}  // namespace ssan
