#include "ssan/error.hpp"

#include <utility>

namespace ssan {

ValidationError::ValidationError(std::string doc_id, const std::string& what)
    : Error("document '" + doc_id + "': " + what), doc_id_(std::move(doc_id)) {}

}  // namespace ssan
