// SPDX-License-Identifier: Apache-2.0
#include <bit>
#include <stdexcept>

#include "sparsekern/sparse_tensor.hpp"

namespace sparsekern {

CoordIndex::CoordIndex(std::span<const Coord3> coords) {
  if (coords.empty()) return;
  if (coords.size() >= kNoSite) throw ShapeError("too many sites for 32-bit row indices");
  const std::size_t capacity = std::bit_ceil(coords.size() * 2);
  slots_.assign(capacity, Slot{});
  mask_ = capacity - 1;
  for (std::size_t row = 0; row < coords.size(); ++row) {
    const Coord3& c = coords[row];
    std::size_t slot = Coord3Hash{}(c) & mask_;
    while (slots_[slot].row != kNoSite) {
      if (slots_[slot].key == c) throw DuplicateCoord(c);
      slot = (slot + 1) & mask_;
    }
    slots_[slot] = Slot{c, static_cast<std::uint32_t>(row)};
  }
  size_ = coords.size();
}

VoxelSet::VoxelSet(std::vector<Coord3> coords) : coords_(std::move(coords)) {
  for (std::size_t i = 1; i < coords_.size(); ++i) {
    if (coords_[i] == coords_[i - 1]) throw DuplicateCoord(coords_[i]);
    if (coords_[i] < coords_[i - 1]) {
      throw std::invalid_argument("VoxelSet coordinates must be in lexicographic order");
    }
  }
  index_ = CoordIndex(coords_);
}

std::vector<std::size_t> canonical_order(std::span<const Coord3> coords) {
  std::vector<std::size_t> order(coords.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::ranges::stable_sort(order, [&](std::size_t a, std::size_t b) { return coords[a] < coords[b]; });
  return order;
}

}  // namespace sparsekern
