// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <istream>
#include <vector>

#include "sparsekern/sparse_tensor.hpp"

namespace sparsekern {

/// Inclusive integer range of one axis.
struct AxisRange {
  std::int32_t lo = 0;
  std::int32_t hi = 0;
  std::uint64_t cells() const noexcept { return hi < lo ? 0 : static_cast<std::uint64_t>(hi - lo) + 1; }
};

/// A reproducible random scene: `n_voxels` distinct cells drawn uniformly
/// without replacement from the box `extent`, features uniform in [-1, 1).
struct SceneSpec {
  std::uint64_t n_voxels = 0;
  std::array<AxisRange, 3> extent{};
  std::uint32_t channels = 1;
  std::uint64_t seed = 0;

  std::uint64_t volume() const noexcept { return extent[0].cells() * extent[1].cells() * extent[2].cells(); }

  /// Cube [lo, hi]^3.
  static SceneSpec cube(std::uint64_t n, std::int32_t lo, std::int32_t hi, std::uint32_t channels, std::uint64_t seed) {
    return SceneSpec{n, {AxisRange{lo, hi}, AxisRange{lo, hi}, AxisRange{lo, hi}}, channels, seed};
  }
};

/// Sampling procedure (part of the reproducibility contract):
///   1. SplitMix64(seed) drives everything.
///   2. Cells are linearised as ((x - x.lo) * ny + (y - y.lo)) * nz + (z - z.lo)
///      and n distinct linear indices are chosen with Floyd's algorithm
///      (for j = V - n .. V - 1: t = below(j + 1); take t unless taken, else j).
///   3. Coordinates are sorted canonically; features are then drawn row by row,
///      channel by channel, as uniform(-1, 1) in double and cast to T.
/// Throws InfeasibleScene when n exceeds the box volume or a range is empty.
template <typename T>
SparseTensor<T> random_scene(const SceneSpec& spec);

/// One point of a point cloud.
struct Point {
  std::array<double, 3> xyz{};
  std::vector<double> features;
};

struct VoxelGrid {
  std::array<double, 3> voxel_size{};
  /// Half-open per-axis interval [min, max).
  std::array<std::array<double, 2>, 3> range{};

  /// Number of voxel cells covering `range` on one axis.
  std::uint64_t cells(int axis) const;
};

/// Cell of a point is floor((p - min) / size) per axis; points outside the
/// half-open range are dropped; the feature of a cell is the mean of its
/// points' features (accumulated in double). Throws EmptyScene when no point
/// survives, ShapeError on inconsistent feature widths and
/// std::invalid_argument for a non-positive voxel size or degenerate range.
template <typename T>
SparseTensor<T> voxelize(std::span<const Point> points, const VoxelGrid& grid);

/// Reads "x,y,z,f1,...,fC" lines after a one-line header. Throws FormatError
/// with the byte offset of the offending line.
std::vector<Point> read_point_csv(std::istream& in);

}  // namespace sparsekern
