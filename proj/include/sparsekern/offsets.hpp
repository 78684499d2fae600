// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "sparsekern/coord.hpp"

namespace sparsekern {

enum class PatternKind { dense, dilated };

/// The kernel space: unique integer offsets in lexicographic order.
struct OffsetPattern {
  std::vector<Coord3> offsets;
  int kernel_size = 1;  ///< L for dense patterns, the base size for dilated ones
  int dilation = 1;
  PatternKind kind = PatternKind::dense;

  std::size_t size() const noexcept { return offsets.size(); }
  /// Largest |component| over all offsets.
  int reach() const noexcept { return dilation * (kernel_size - 1) / 2; }
  /// Position of `k` in `offsets`, or -1.
  int index_of(const Coord3& k) const noexcept;

  friend bool operator==(const OffsetPattern& a, const OffsetPattern& b) { return a.offsets == b.offsets; }
};

/// Dense L x L x L pattern, components in [-(L-1)/2, (L-1)/2].
/// Throws InvalidKernelSize unless L is odd and positive.
OffsetPattern enumerate_offsets(int kernel_size);

/// `dilation` times each offset of the dense `base` pattern. A unit dilation
/// yields the dense pattern itself. Throws InvalidKernelSize.
OffsetPattern enumerate_dilated(int base, int dilation);

/// Spatial-wise partition of a dense L^3 kernel onto a 3^3 group grid.
/// Each axis is split by sign (negative, zero, positive), so the centre
/// group holds the zero offset alone and every other group is the product
/// of per-axis thirds. Groups are indexed lexicographically over
/// (gx, gy, gz) in {-1, 0, 1}^3; the centre is group 13.
struct GroupMap {
  static constexpr int kGrid = 3;
  static constexpr int kGroups = 27;
  static constexpr int kCenter = 13;

  int kernel_size = 3;
  std::vector<std::uint8_t> assign;                       ///< offset index -> group
  std::array<std::vector<std::uint32_t>, kGroups> members;  ///< ascending offset indices

  static constexpr int group_index(const Coord3& g) { return (g.x + 1) * 9 + (g.y + 1) * 3 + (g.z + 1); }
  static constexpr Coord3 group_coord(int g) { return {g / 9 - 1, (g / 3) % 3 - 1, g % 3 - 1}; }
};

/// Throws InvalidKernelSize unless L is odd and at least 3.
GroupMap partition_offsets(int kernel_size);

}  // namespace sparsekern
