#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ssan/encoder.hpp"
#include "ssan/optimizer.hpp"
#include "ssan/structure.hpp"

namespace ssan {

/// Every architecture, ablation and training knob of a run.
///
/// The text form is one `key = value` per line ('#' starts a comment); keys
/// are snake_case and the CLI accepts the same names in kebab-case.
struct ModelConfig {
  // architecture
  std::size_t layers = 2;
  std::size_t heads = 2;
  std::size_t d_model = 32;
  std::size_t ffn_multiplier = 4;
  std::size_t d_distance = 8;
  std::size_t max_len = 512;
  double layer_norm_eps = 1e-5;
  bool type_embedding = true;
  bool coref_embedding = true;
  std::size_t coref_capacity = 64;

  // structure
  TransformationMode mode = TransformationMode::Biaffine;
  std::optional<BiasTerms> terms;  // unset: every term of the mode
  DependencySet exclude;
  std::string structured_layers = "all";

  // data
  std::string schema;  // relation schema file; empty = derive from train
  std::size_t min_count = 1;

  // decision rule
  double threshold = 0.5;
  bool auto_threshold = false;

  // optimization
  std::uint64_t seed = 1;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::size_t epochs = 30;
  std::size_t batch_size = 4;

  Transformation transformation() const;
  EncoderConfig encoder_config() const;
  AdamConfig adam_config() const;

  /// Throws ConfigError on an inconsistent configuration.
  void validate() const;

  /// Assigns one field from text; `key` may be snake_case or kebab-case.
  /// Throws ConfigError for unknown keys or malformed values.
  void set(std::string_view key, std::string_view value);
  std::string get(std::string_view key) const;
  /// Field names in canonical (snake_case) order.
  static const std::vector<std::string>& keys();

  std::string to_text() const;
  static ModelConfig from_text(std::string_view text);
  static ModelConfig load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  bool operator==(const ModelConfig& other) const { return to_text() == other.to_text(); }
};

std::string kebab_case(std::string_view key);

}  // namespace ssan
