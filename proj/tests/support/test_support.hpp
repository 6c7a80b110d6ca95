#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "ssan/config.hpp"
#include "ssan/document.hpp"
#include "ssan/random.hpp"
#include "ssan/structure.hpp"

namespace ssan::testing {

std::filesystem::path fixture_path(const std::string& name);

/// The two-sentence, three-entity example document.
Document fig2_document();

/// Reads a character grid (C c R r E .; '#' lines skipped).
StructureMatrix read_char_grid(const std::filesystem::path& path, const std::string& doc_id);

/// Random valid document: 1-4 sentences of 1-8 tokens, random disjoint
/// mentions grouped into entities, random facts.
Document random_document(Rng& rng, const std::string& doc_id);

/// Double loop over classify_dependency with annotations computed by a
/// direct scan of the mention spans.
StructureMatrix brute_force_structure(const Document& doc);

/// 2 layers, 2 heads, d_model 8, short tables: for gradient checks.
ModelConfig tiny_config();

/// Fresh temporary directory under the system temp path.
std::filesystem::path temp_dir(const std::string& tag);

}  // namespace ssan::testing
