// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "sparsekern/sparse_tensor.hpp"

namespace sparsekern {

/// SPVX layout (little-endian):
///   offset 0   "SPVX1\n"           magic, 6 bytes
///   offset 6   u32 version = 1
///   offset 10  u32 N               number of sites
///   offset 14  u32 C               channels
///   offset 18  u8  dtype           0 = f32, 1 = f64
///   offset 19  N x 3 i32           coordinates, strictly increasing (x, y, z)
///   then       N x C reals         features, row-major
inline constexpr std::string_view kSpvxMagic = "SPVX1\n";
inline constexpr std::uint32_t kSpvxVersion = 1;
inline constexpr std::size_t kSpvxHeaderSize = 19;

enum class DType : std::uint8_t { f32 = 0, f64 = 1 };

template <typename T>
constexpr DType dtype_of() {
  static_assert(std::is_same_v<T, float> || std::is_same_v<T, double>);
  return std::is_same_v<T, float> ? DType::f32 : DType::f64;
}

constexpr std::size_t dtype_size(DType d) { return d == DType::f32 ? 4 : 8; }
constexpr std::string_view dtype_name(DType d) { return d == DType::f32 ? "f32" : "f64"; }

struct SpvxHeader {
  std::uint32_t version = kSpvxVersion;
  std::uint32_t n = 0;
  std::uint32_t channels = 0;
  DType dtype = DType::f32;
};

template <typename T>
std::vector<std::byte> serialize_spvx(const SparseTensor<T>& tensor);

/// Validates magic, version and dtype only.
SpvxHeader read_spvx_header(std::span<const std::byte> bytes);

/// Full decode. Features stored in the other precision are converted.
/// Throws FormatError for bad magic (offset 0), bad version or dtype,
/// truncation (offset = stream length), out-of-order or repeated coordinates
/// (offset of the offending entry) and trailing bytes.
template <typename T>
SparseTensor<T> deserialize_spvx(std::span<const std::byte> bytes);

}  // namespace sparsekern
