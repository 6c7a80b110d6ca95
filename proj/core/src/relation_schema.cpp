#include "ssan/relation_schema.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "ssan/error.hpp"

namespace ssan {

RelationSchema::RelationSchema(std::vector<std::string> names)
    : names_(std::move(names)) {
  if (names_.empty()) throw ConfigError("relation schema is empty");
  std::set<std::string> seen;
  for (const auto& n : names_) {
    if (n.empty()) throw ConfigError("relation schema has an empty name");
    if (!seen.insert(n).second)
      throw ConfigError("relation schema repeats '" + n + "'");
  }
}

RelationSchema RelationSchema::from_corpus(std::span<const Document> docs) {
  std::set<std::string> names;
  for (const auto& d : docs)
    for (const auto& f : d.facts) names.insert(f.relation);
  return RelationSchema(std::vector<std::string>(names.begin(), names.end()));
}

RelationSchema RelationSchema::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open relation schema '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return from_text(buf.str());
}

std::optional<std::size_t> RelationSchema::index(std::string_view name) const {
  const auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - names_.begin());
}

std::string RelationSchema::to_text() const {
  std::string out;
  for (const auto& n : names_) out += n + "\n";
  return out;
}

RelationSchema RelationSchema::from_text(std::string_view text) {
  std::vector<std::string> names;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' '))
      line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    names.push_back(line);
  }
  return RelationSchema(std::move(names));
}

}  // namespace ssan
