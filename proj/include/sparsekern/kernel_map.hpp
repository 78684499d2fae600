// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "sparsekern/offsets.hpp"
#include "sparsekern/sparse_tensor.hpp"

namespace sparsekern {

/// One gather-scatter entry: feature row `in` contributes to output row `out`.
struct Pair {
  std::uint32_t in = 0;
  std::uint32_t out = 0;
  friend bool operator==(const Pair&, const Pair&) = default;
};

/// Rulebook with one pair list per kernel offset. Input p feeds output q at
/// offset k when p == stride * q + k. Each list is sorted by output row and,
/// because p is then fixed, holds at most one pair per output row.
struct KernelMap {
  OffsetPattern pattern;
  std::vector<std::vector<Pair>> pairs;  ///< indexed like pattern.offsets
  VoxelSetPtr inputs;
  VoxelSetPtr outputs;  ///< same object as `inputs` for submanifold maps
  int stride = 1;
  bool submanifold = true;

  std::size_t total_pairs() const noexcept;
  std::size_t n_in() const noexcept { return inputs->size(); }
  std::size_t n_out() const noexcept { return outputs->size(); }
};

/// A pair re-bucketed into a weight group, remembering its original offset
/// (needed for the position embedding).
struct GroupedPair {
  std::uint32_t in = 0;
  std::uint32_t out = 0;
  std::uint32_t offset = 0;
  friend bool operator==(const GroupedPair&, const GroupedPair&) = default;
};

/// Rulebook with one pair list per weight group, each sorted by
/// (output row, input row). For a fixed output row, input-row order equals
/// offset order, so per-group sums accumulate in the same sequence as the
/// per-offset map visits them.
struct GroupedKernelMap {
  int kernel_size = 3;
  std::array<std::vector<GroupedPair>, GroupMap::kGroups> groups;
  VoxelSetPtr inputs;
  VoxelSetPtr outputs;
  int stride = 1;
  bool submanifold = true;

  std::size_t total_pairs() const noexcept;
  std::size_t n_in() const noexcept { return inputs->size(); }
  std::size_t n_out() const noexcept { return outputs->size(); }
  /// Sum over output rows of the number of groups with at least one pair.
  std::uint64_t nonempty_group_slots() const noexcept;
};

/// Output sites equal input sites; pair (i -> j) at k iff coords[j] + k is active.
KernelMap build_kernel_map_submanifold(const VoxelSetPtr& sites, const OffsetPattern& pattern);

/// Output sites are every q with stride * q + k active for some k, in
/// canonical order. Throws InvalidStride for stride < 1.
KernelMap build_kernel_map_regular(const VoxelSetPtr& sites, const OffsetPattern& pattern, int stride);

template <typename T>
KernelMap build_kernel_map_submanifold(const SparseTensor<T>& x, const OffsetPattern& pattern) {
  return build_kernel_map_submanifold(x.sites(), pattern);
}

template <typename T>
KernelMap build_kernel_map_regular(const SparseTensor<T>& x, const OffsetPattern& pattern, int stride) {
  return build_kernel_map_regular(x.sites(), pattern, stride);
}

/// Re-buckets a dense-pattern map by weight group. The pair multiset is
/// preserved. Throws PartitionMismatch unless kmap uses the dense pattern of
/// size gmap.kernel_size.
GroupedKernelMap group_kernel_map(const KernelMap& kmap, const GroupMap& gmap);

}  // namespace sparsekern
