// SPDX-License-Identifier: Apache-2.0
#include "sparsekern/errors.hpp"

namespace sparsekern {

Error::Error(const char* name, const std::string& detail)
    : std::runtime_error(std::string(name) + ": " + detail) {}

DuplicateCoord::DuplicateCoord(const Coord3& c)
    : Error("DuplicateCoord", "coordinate " + to_string(c) + " appears more than once"), coord_(c) {}

FormatError::FormatError(const std::string& detail, std::uint64_t offset)
    : Error("FormatError", "at byte " + std::to_string(offset) + ": " + detail), offset_(offset) {}

}  // namespace sparsekern
