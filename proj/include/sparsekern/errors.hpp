// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "sparsekern/coord.hpp"

namespace sparsekern {

/// Root of every error raised by the engine. `what()` always starts with the
/// concrete error name so command-line callers can print it verbatim.
class Error : public std::runtime_error {
 public:
  Error(const char* name, const std::string& detail);
};

class DuplicateCoord : public Error {
 public:
  explicit DuplicateCoord(const Coord3& c);
  const Coord3& coord() const noexcept { return coord_; }

 private:
  Coord3 coord_;
};

class FormatError : public Error {
 public:
  FormatError(const std::string& detail, std::uint64_t offset);
  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::uint64_t offset_;
};

#define SPARSEKERN_DECLARE_ERROR(Name)                                      \
  class Name : public Error {                                               \
   public:                                                                  \
    explicit Name(const std::string& detail) : Error(#Name, detail) {}      \
  }

SPARSEKERN_DECLARE_ERROR(InfeasibleScene);
SPARSEKERN_DECLARE_ERROR(EmptyScene);
SPARSEKERN_DECLARE_ERROR(InvalidKernelSize);
SPARSEKERN_DECLARE_ERROR(InvalidStride);
SPARSEKERN_DECLARE_ERROR(PartitionMismatch);
SPARSEKERN_DECLARE_ERROR(ShapeError);
SPARSEKERN_DECLARE_ERROR(ChannelChainError);
SPARSEKERN_DECLARE_ERROR(TargetNotFound);
SPARSEKERN_DECLARE_ERROR(LabelError);

#undef SPARSEKERN_DECLARE_ERROR

}  // namespace sparsekern
