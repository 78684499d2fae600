// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <ostream>
#include <string>

namespace sparsekern {

/// Integer voxel coordinate. Ordering is lexicographic (x, then y, then z),
/// which is also the canonical row order of every sparse tensor.
struct Coord3 {
  std::int32_t x = 0;
  std::int32_t y = 0;
  std::int32_t z = 0;

  friend constexpr auto operator<=>(const Coord3&, const Coord3&) = default;

  constexpr Coord3 operator+(const Coord3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  constexpr Coord3 operator-(const Coord3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  constexpr Coord3 operator-() const { return {-x, -y, -z}; }
  constexpr Coord3 operator*(std::int32_t s) const { return {x * s, y * s, z * s}; }
};

inline std::string to_string(const Coord3& c) {
  return "(" + std::to_string(c.x) + "," + std::to_string(c.y) + "," + std::to_string(c.z) + ")";
}

inline std::ostream& operator<<(std::ostream& os, const Coord3& c) { return os << to_string(c); }

/// Chebyshev (L-infinity) distance, the reach metric of cubic kernels.
constexpr std::int32_t chebyshev(const Coord3& a, const Coord3& b) {
  auto d = [](std::int32_t u, std::int32_t v) { return u > v ? u - v : v - u; };
  std::int32_t m = d(a.x, b.x);
  if (d(a.y, b.y) > m) m = d(a.y, b.y);
  if (d(a.z, b.z) > m) m = d(a.z, b.z);
  return m;
}

struct Coord3Hash {
  std::size_t operator()(const Coord3& c) const noexcept {
    std::uint64_t h = static_cast<std::uint64_t>(static_cast<std::uint32_t>(c.x)) * 0x9E3779B97F4A7C15ULL;
    h ^= static_cast<std::uint64_t>(static_cast<std::uint32_t>(c.y)) * 0xC2B2AE3D27D4EB4FULL;
    h ^= static_cast<std::uint64_t>(static_cast<std::uint32_t>(c.z)) * 0x165667B19E3779F9ULL;
    h ^= h >> 31;
    h *= 0xBF58476D1CE4E5B9ULL;
    h ^= h >> 29;
    return static_cast<std::size_t>(h);
  }
};

}  // namespace sparsekern
