// SPDX-License-Identifier: Apache-2.0
#include "sparsekern/scene.hpp"

#include <charconv>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <unordered_set>

#include "sparsekern/rng.hpp"

namespace sparsekern {

template <typename T>
SparseTensor<T> random_scene(const SceneSpec& spec) {
  const std::uint64_t volume = spec.volume();
  if (volume == 0) throw InfeasibleScene("extent is empty");
  if (spec.n_voxels > volume) {
    throw InfeasibleScene(std::to_string(spec.n_voxels) + " voxels requested but the extent holds only " +
                          std::to_string(volume) + " cells");
  }
  if (spec.n_voxels == 0) throw InfeasibleScene("a scene needs at least one voxel");

  SplitMix64 rng(spec.seed);
  std::unordered_set<std::uint64_t> taken;
  taken.reserve(spec.n_voxels * 2);
  std::vector<std::uint64_t> picked;
  picked.reserve(spec.n_voxels);
  for (std::uint64_t j = volume - spec.n_voxels; j < volume; ++j) {
    const std::uint64_t t = rng.below(j + 1);
    const std::uint64_t chosen = taken.insert(t).second ? t : j;
    if (chosen == j) taken.insert(j);
    picked.push_back(chosen);
  }

  const std::uint64_t ny = spec.extent[1].cells();
  const std::uint64_t nz = spec.extent[2].cells();
  std::vector<Coord3> coords;
  coords.reserve(picked.size());
  for (std::uint64_t lin : picked) {
    const auto z = static_cast<std::int32_t>(lin % nz);
    const auto y = static_cast<std::int32_t>((lin / nz) % ny);
    const auto x = static_cast<std::int32_t>(lin / (nz * ny));
    coords.push_back({spec.extent[0].lo + x, spec.extent[1].lo + y, spec.extent[2].lo + z});
  }
  std::ranges::sort(coords);

  Matrix<T> features(coords.size(), spec.channels);
  for (auto& v : features.data()) v = static_cast<T>(rng.uniform(-1.0, 1.0));
  return SparseTensor<T>(std::make_shared<const VoxelSet>(std::move(coords)), std::move(features));
}

std::uint64_t VoxelGrid::cells(int axis) const {
  const double span = range[axis][1] - range[axis][0];
  return static_cast<std::uint64_t>(std::ceil(span / voxel_size[axis]));
}

template <typename T>
SparseTensor<T> voxelize(std::span<const Point> points, const VoxelGrid& grid) {
  for (int a = 0; a < 3; ++a) {
    if (!(grid.voxel_size[a] > 0.0)) throw std::invalid_argument("voxel size must be positive");
    if (!(grid.range[a][1] > grid.range[a][0])) throw std::invalid_argument("voxelization range is degenerate");
  }
  std::size_t channels = points.empty() ? 0 : points.front().features.size();

  struct Cell {
    std::vector<double> sum;
    std::size_t count = 0;
  };
  std::map<Coord3, Cell> cells;
  for (const Point& p : points) {
    if (p.features.size() != channels) throw ShapeError("points carry different feature counts");
    Coord3 c;
    bool inside = true;
    for (int a = 0; a < 3 && inside; ++a) {
      const double v = p.xyz[a];
      if (!(v >= grid.range[a][0] && v < grid.range[a][1])) {
        inside = false;
        break;
      }
      auto idx = static_cast<std::int64_t>(std::floor((v - grid.range[a][0]) / grid.voxel_size[a]));
      // Rounding can push a point just below max into the cell past the grid.
      idx = std::min<std::int64_t>(idx, static_cast<std::int64_t>(grid.cells(a)) - 1);
      (a == 0 ? c.x : a == 1 ? c.y : c.z) = static_cast<std::int32_t>(idx);
    }
    if (!inside) continue;
    Cell& cell = cells[c];
    if (cell.sum.empty()) cell.sum.assign(channels, 0.0);
    for (std::size_t k = 0; k < channels; ++k) cell.sum[k] += p.features[k];
    ++cell.count;
  }
  if (cells.empty()) throw EmptyScene("no point falls inside the voxelization range");

  std::vector<Coord3> coords;
  coords.reserve(cells.size());
  Matrix<T> features(cells.size(), channels);
  std::size_t row = 0;
  for (const auto& [c, cell] : cells) {
    coords.push_back(c);
    for (std::size_t k = 0; k < channels; ++k) {
      features(row, k) = static_cast<T>(cell.sum[k] / static_cast<double>(cell.count));
    }
    ++row;
  }
  return SparseTensor<T>(std::make_shared<const VoxelSet>(std::move(coords)), std::move(features));
}

namespace {

bool parse_double(std::string_view s, double& out) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace

std::vector<Point> read_point_csv(std::istream& in) {
  std::vector<Point> points;
  std::string line;
  std::uint64_t offset = 0;
  if (!std::getline(in, line)) return points;  // no header: no points
  offset += line.size() + 1;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    const std::uint64_t line_offset = offset;
    offset += line.size() + 1;
    if (line.empty() || line == "\r") continue;
    std::vector<double> values;
    std::string_view rest(line);
    while (true) {
      const auto comma = rest.find(',');
      double v = 0.0;
      if (!parse_double(rest.substr(0, comma), v)) throw FormatError("malformed number in point CSV", line_offset);
      values.push_back(v);
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (values.size() < 4) throw FormatError("point CSV rows need x,y,z and at least one feature", line_offset);
    if (width == 0) width = values.size();
    if (values.size() != width) throw FormatError("point CSV rows have different column counts", line_offset);
    points.push_back(Point{{values[0], values[1], values[2]}, std::vector<double>(values.begin() + 3, values.end())});
  }
  return points;
}

template SparseTensor<float> random_scene<float>(const SceneSpec&);
template SparseTensor<double> random_scene<double>(const SceneSpec&);
template SparseTensor<float> voxelize<float>(std::span<const Point>, const VoxelGrid&);
template SparseTensor<double> voxelize<double>(std::span<const Point>, const VoxelGrid&);

}  // namespace sparsekern
