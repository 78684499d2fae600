// SPDX-License-Identifier: Apache-2.0
#include "sparsekern/kernel_map.hpp"

#include <algorithm>

#include "sparsekern/parallel.hpp"

namespace sparsekern {

std::size_t KernelMap::total_pairs() const noexcept {
  std::size_t n = 0;
  for (const auto& bucket : pairs) n += bucket.size();
  return n;
}

std::size_t GroupedKernelMap::total_pairs() const noexcept {
  std::size_t n = 0;
  for (const auto& bucket : groups) n += bucket.size();
  return n;
}

std::uint64_t GroupedKernelMap::nonempty_group_slots() const noexcept {
  std::uint64_t n = 0;
  for (const auto& bucket : groups) {
    for (std::size_t p = 0; p < bucket.size(); ++p) {
      if (p == 0 || bucket[p].out != bucket[p - 1].out) ++n;
    }
  }
  return n;
}

namespace {

// Fills per-offset lists for outputs [0, n_out). `source(j, k)` returns the
// input row feeding output j at offset k, or kNoSite. Chunks are processed
// independently and concatenated in order, so the result does not depend on
// the thread count.
template <typename Source>
std::vector<std::vector<Pair>> collect_pairs(std::size_t n_out, std::size_t n_offsets, Source source) {
  const auto ranges = split_range(n_out, 4096);
  std::vector<std::vector<std::vector<Pair>>> partial(ranges.size(), std::vector<std::vector<Pair>>(n_offsets));
  parallel_tasks(ranges.size(), [&](std::size_t t) {
    auto& local = partial[t];
    for (std::size_t j = ranges[t].begin; j < ranges[t].end; ++j) {
      for (std::size_t k = 0; k < n_offsets; ++k) {
        const std::uint32_t i = source(j, k);
        if (i != kNoSite) local[k].push_back({i, static_cast<std::uint32_t>(j)});
      }
    }
  });
  if (partial.size() == 1) return std::move(partial.front());
  std::vector<std::vector<Pair>> out(n_offsets);
  for (std::size_t k = 0; k < n_offsets; ++k) {
    std::size_t total = 0;
    for (const auto& p : partial) total += p[k].size();
    out[k].reserve(total);
    for (const auto& p : partial) out[k].insert(out[k].end(), p[k].begin(), p[k].end());
  }
  return out;
}

bool divides(std::int32_t s, const Coord3& c) { return c.x % s == 0 && c.y % s == 0 && c.z % s == 0; }

}  // namespace

KernelMap build_kernel_map_submanifold(const VoxelSetPtr& sites, const OffsetPattern& pattern) {
  KernelMap map;
  map.pattern = pattern;
  map.inputs = sites;
  map.outputs = sites;
  map.stride = 1;
  map.submanifold = true;
  const VoxelSet& set = *sites;
  const auto& offsets = pattern.offsets;
  map.pairs = collect_pairs(set.size(), offsets.size(), [&](std::size_t j, std::size_t k) {
    return set.find(set[j] + offsets[k]);
  });
  return map;
}

KernelMap build_kernel_map_regular(const VoxelSetPtr& sites, const OffsetPattern& pattern, int stride) {
  if (stride < 1) throw InvalidStride("stride " + std::to_string(stride) + " must be at least 1");
  const VoxelSet& set = *sites;

  std::vector<Coord3> out_coords;
  for (const Coord3& p : set.coords()) {
    for (const Coord3& k : pattern.offsets) {
      const Coord3 d = p - k;
      if (divides(stride, d)) out_coords.push_back({d.x / stride, d.y / stride, d.z / stride});
    }
  }
  std::ranges::sort(out_coords);
  out_coords.erase(std::unique(out_coords.begin(), out_coords.end()), out_coords.end());

  KernelMap map;
  map.pattern = pattern;
  map.inputs = sites;
  map.outputs = std::make_shared<const VoxelSet>(std::move(out_coords));
  map.stride = stride;
  map.submanifold = false;
  const VoxelSet& outs = *map.outputs;
  const auto& offsets = pattern.offsets;
  map.pairs = collect_pairs(outs.size(), offsets.size(), [&](std::size_t j, std::size_t k) {
    return set.find(outs[j] * stride + offsets[k]);
  });
  return map;
}

GroupedKernelMap group_kernel_map(const KernelMap& kmap, const GroupMap& gmap) {
  if (kmap.pattern.kind != PatternKind::dense || kmap.pattern.kernel_size != gmap.kernel_size ||
      kmap.pairs.size() != gmap.assign.size()) {
    throw PartitionMismatch("kernel map of size " + std::to_string(kmap.pattern.kernel_size) +
                            " does not match a partition of size " + std::to_string(gmap.kernel_size));
  }
  GroupedKernelMap g;
  g.kernel_size = gmap.kernel_size;
  g.inputs = kmap.inputs;
  g.outputs = kmap.outputs;
  g.stride = kmap.stride;
  g.submanifold = kmap.submanifold;

  const std::size_t n_out = kmap.n_out();
  std::vector<std::size_t> cursor(kmap.pairs.size(), 0);
  for (int group = 0; group < GroupMap::kGroups; ++group) {
    const auto& members = gmap.members[group];
    std::size_t total = 0;
    for (auto k : members) total += kmap.pairs[k].size();
    auto& bucket = g.groups[group];
    bucket.reserve(total);
    // Merge member lists by output row; ties resolve in offset order.
    for (std::size_t j = 0; j < n_out && bucket.size() < total; ++j) {
      for (auto k : members) {
        const auto& list = kmap.pairs[k];
        std::size_t& c = cursor[k];
        if (c < list.size() && list[c].out == j) {
          bucket.push_back({list[c].in, list[c].out, k});
          ++c;
        }
      }
    }
  }
  return g;
}

}  // namespace sparsekern
