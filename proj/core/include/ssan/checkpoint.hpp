#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "ssan/optimizer.hpp"
#include "ssan/parameter.hpp"
#include "ssan/tensor.hpp"

namespace ssan {

/// Binary archive layout (all integers little-endian):
///   magic "SSANCKPT", u32 version
///   u32 metadata count, then (string key, string value) pairs
///   u32 parameter count, then per parameter:
///     string name, u8 trainable, u32 rank, u64 dims[rank], f64 values[]
///   u64 optimizer step, u32 moment count, then per entry:
///     string name, u64 length, f64 first[length], f64 second[length]
/// Strings are u32 length + bytes; f64 values are raw IEEE-754 doubles.
struct Checkpoint {
  static constexpr std::uint32_t kVersion = 1;

  std::map<std::string, std::string> metadata;
  struct Entry {
    std::string name;
    bool trainable = true;
    Shape shape;
    std::vector<double> values;
    bool operator==(const Entry&) const = default;
  };
  std::vector<Entry> parameters;
  AdamState optimizer;

  static Checkpoint capture(const ParameterStore& store, const AdamState& state,
                            std::map<std::string, std::string> metadata = {});
  /// Copies values into a store with identical names and shapes.
  void restore_into(ParameterStore& store) const;

  void write(std::ostream& out) const;
  static Checkpoint read(std::istream& in);
  void save(const std::filesystem::path& path) const;
  static Checkpoint load(const std::filesystem::path& path);
};

}  // namespace ssan
