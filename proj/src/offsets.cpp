// SPDX-License-Identifier: Apache-2.0
#include "sparsekern/offsets.hpp"

#include <algorithm>

#include "sparsekern/errors.hpp"

namespace sparsekern {

int OffsetPattern::index_of(const Coord3& k) const noexcept {
  const auto it = std::ranges::lower_bound(offsets, k);
  return it != offsets.end() && *it == k ? static_cast<int>(it - offsets.begin()) : -1;
}

namespace {

void check_odd(int size, int minimum) {
  if (size < minimum || size % 2 == 0) {
    throw InvalidKernelSize("kernel size " + std::to_string(size) + " must be odd and at least " + std::to_string(minimum));
  }
}

}  // namespace

OffsetPattern enumerate_offsets(int kernel_size) {
  check_odd(kernel_size, 1);
  if (kernel_size > 255) throw InvalidKernelSize("kernel size " + std::to_string(kernel_size) + " is unreasonably large");
  const int r = (kernel_size - 1) / 2;
  OffsetPattern p;
  p.kernel_size = kernel_size;
  p.offsets.reserve(static_cast<std::size_t>(kernel_size) * kernel_size * kernel_size);
  for (int x = -r; x <= r; ++x)
    for (int y = -r; y <= r; ++y)
      for (int z = -r; z <= r; ++z) p.offsets.push_back({x, y, z});
  return p;
}

OffsetPattern enumerate_dilated(int base, int dilation) {
  check_odd(base, 1);
  if (dilation < 1) throw InvalidKernelSize("dilation " + std::to_string(dilation) + " must be at least 1");
  OffsetPattern p = enumerate_offsets(base);
  if (dilation == 1) return p;
  for (Coord3& k : p.offsets) k = k * dilation;
  p.dilation = dilation;
  p.kind = PatternKind::dilated;
  return p;
}

GroupMap partition_offsets(int kernel_size) {
  check_odd(kernel_size, 3);
  const OffsetPattern dense = enumerate_offsets(kernel_size);
  GroupMap g;
  g.kernel_size = kernel_size;
  g.assign.resize(dense.size());
  auto sign = [](int v) { return (v > 0) - (v < 0); };
  for (std::size_t k = 0; k < dense.size(); ++k) {
    const Coord3& o = dense.offsets[k];
    const int group = GroupMap::group_index({sign(o.x), sign(o.y), sign(o.z)});
    g.assign[k] = static_cast<std::uint8_t>(group);
    g.members[group].push_back(static_cast<std::uint32_t>(k));
  }
  return g;
}

}  // namespace sparsekern
