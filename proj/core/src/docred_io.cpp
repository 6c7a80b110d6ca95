#include "ssan/docred_io.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "ssan/error.hpp"

namespace ssan {

namespace {

using nlohmann::json;

std::string where(std::string_view source, std::size_t index) {
  return std::string(source) + " document #" + std::to_string(index);
}

template <typename T>
T field(const json& obj, const char* key, const std::string& context) {
  if (!obj.is_object() || !obj.contains(key))
    throw FormatError(context + ": missing field '" + key + "'");
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw FormatError(context + ": field '" + key + "' has the wrong type (" +
                      e.what() + ")");
  }
}

Document parse_document(const json& j, std::size_t index,
                        std::string_view source, const RelationSchema* schema) {
  const auto context = where(source, index);
  Document doc;
  doc.doc_id = field<std::string>(j, "title", context);
  const auto doc_context = context + " ('" + doc.doc_id + "')";
  doc.sentences =
      field<std::vector<std::vector<std::string>>>(j, "sents", doc_context);

  const auto& vertex_set = j.contains("vertexSet") ? j.at("vertexSet") : json();
  if (!vertex_set.is_array())
    throw FormatError(doc_context + ": missing or non-array 'vertexSet'");
  for (std::size_t e = 0; e < vertex_set.size(); ++e) {
    const auto& mentions = vertex_set[e];
    if (!mentions.is_array())
      throw FormatError(doc_context + ": vertexSet[" + std::to_string(e) +
                        "] is not a list of mentions");
    Entity entity;
    entity.ordinal = e;
    for (std::size_t k = 0; k < mentions.size(); ++k) {
      const auto mctx = doc_context + " vertexSet[" + std::to_string(e) + "][" +
                        std::to_string(k) + "]";
      const auto& mj = mentions[k];
      Mention m;
      m.surface = field<std::string>(mj, "name", mctx);
      const auto sent = field<long long>(mj, "sent_id", mctx);
      const auto pos = field<std::vector<long long>>(mj, "pos", mctx);
      if (pos.size() != 2)
        throw FormatError(mctx + ": 'pos' must hold two integers");
      if (sent < 0 || pos[0] < 0 || pos[1] < 0)
        throw ValidationError(doc.doc_id, mctx + ": negative index");
      m.sentence_index = static_cast<std::size_t>(sent);
      m.start = static_cast<std::size_t>(pos[0]);
      m.end = static_cast<std::size_t>(pos[1]);
      const auto type = field<std::string>(mj, "type", mctx);
      if (k == 0)
        entity.type = type;
      entity.mentions.push_back(std::move(m));
    }
    doc.entities.push_back(std::move(entity));
  }

  if (j.contains("labels")) {
    const auto& labels = j.at("labels");
    if (!labels.is_array())
      throw FormatError(doc_context + ": 'labels' is not an array");
    for (std::size_t f = 0; f < labels.size(); ++f) {
      const auto lctx = doc_context + " labels[" + std::to_string(f) + "]";
      const auto h = field<long long>(labels[f], "h", lctx);
      const auto t = field<long long>(labels[f], "t", lctx);
      if (h < 0 || t < 0) throw ValidationError(doc.doc_id, lctx + ": negative entity index");
      RelationFact fact{static_cast<std::size_t>(h), static_cast<std::size_t>(t),
                        field<std::string>(labels[f], "r", lctx)};
      if (schema && !schema->index(fact.relation))
        throw ValidationError(doc.doc_id, lctx + ": unknown relation '" +
                                              fact.relation + "'");
      doc.facts.push_back(std::move(fact));
    }
  }

  validate_document(doc);
  return doc;
}

}  // namespace

std::vector<Document> parse_corpus_text(std::string_view text,
                                        const RelationSchema* schema,
                                        std::string_view source) {
  std::vector<Document> docs;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return docs;
  try {
    if (text[first] == '[') {
      const auto all = json::parse(text);
      for (std::size_t i = 0; i < all.size(); ++i)
        docs.push_back(parse_document(all[i], i, source, schema));
    } else if (json::accept(text)) {
      docs.push_back(parse_document(json::parse(text), 0, source, schema));
    } else {
      std::size_t line_no = 0, at = 0;
      while (at < text.size()) {
        auto nl = text.find('\n', at);
        if (nl == std::string_view::npos) nl = text.size();
        const auto line = text.substr(at, nl - at);
        ++line_no;
        at = nl + 1;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
        json j;
        try {
          j = json::parse(line);
        } catch (const json::parse_error& e) {
          throw FormatError(std::string(source) + " line " +
                            std::to_string(line_no) + ": " + e.what());
        }
        docs.push_back(parse_document(j, docs.size(), source, schema));
      }
    }
  } catch (const json::parse_error& e) {
    throw FormatError(std::string(source) + ": malformed JSON: " + e.what());
  }
  return docs;
}

std::vector<Document> parse_corpus(const std::filesystem::path& path,
                                   const RelationSchema* schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open corpus '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_corpus_text(buf.str(), schema, path.string());
}

void write_corpus(std::ostream& out, const std::vector<Document>& docs,
                  int indent) {
  json all = json::array();
  for (const auto& d : docs) {
    json j;
    j["title"] = d.doc_id;
    j["sents"] = d.sentences;
    json vertex_set = json::array();
    for (const auto& e : d.entities) {
      json mentions = json::array();
      for (const auto& m : e.mentions)
        mentions.push_back({{"name", m.surface},
                            {"sent_id", m.sentence_index},
                            {"pos", {m.start, m.end}},
                            {"type", e.type}});
      vertex_set.push_back(std::move(mentions));
    }
    j["vertexSet"] = std::move(vertex_set);
    json labels = json::array();
    for (const auto& f : d.facts)
      labels.push_back({{"h", f.head}, {"t", f.tail}, {"r", f.relation}});
    j["labels"] = std::move(labels);
    all.push_back(std::move(j));
  }
  out << all.dump(indent) << '\n';
}

void save_corpus(const std::filesystem::path& path,
                 const std::vector<Document>& docs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open '" + path.string() + "' for writing");
  write_corpus(out, docs);
}

}  // namespace ssan
