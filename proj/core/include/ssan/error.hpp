#pragma once

#include <stdexcept>
#include <string>

namespace ssan {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Incompatible tensor shapes; the message names the op and both shapes.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Corpus content that violates the document invariants (spans, overlaps,
/// unknown relations). Carries the offending document id.
class ValidationError : public Error {
 public:
  ValidationError(std::string doc_id, const std::string& what);

  const std::string& doc_id() const noexcept { return doc_id_; }

 private:
  std::string doc_id_;
};

/// Malformed input files (JSON, config, checkpoints, grids).
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration values.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace ssan
