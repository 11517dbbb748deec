#pragma once

#include <cstdint>

namespace ontoforge {

using DocId = std::int64_t;

}  // namespace ontoforge
