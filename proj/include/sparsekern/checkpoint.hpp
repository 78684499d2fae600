// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "sparsekern/layers.hpp"
#include "sparsekern/spvx.hpp"

namespace sparsekern {

/// SPWT layer record (little-endian):
///   "SPWT1\n"            magic, 6 bytes
///   u32 L                kernel size
///   u32 G                group grid size: 3 for partition layers, 0 for plain
///   u32 c_in, u32 c_out
///   u8  dtype            0 = f32, 1 = f64
///   W                    (G == 3 ? 27 : L^3) x c_in x c_out, row-major
///   E                    L^3 x c_in, present only when G == 3
/// A model file is one or more records back to back; each record is a
/// submanifold layer applied in file order. Plain records are always dense.
inline constexpr std::string_view kSpwtMagic = "SPWT1\n";

template <typename T>
using AnyLayer = std::variant<PlainConvLayer<T>, SwpConvLayer<T>>;

struct SpwtHeader {
  std::uint32_t kernel_size = 0;
  std::uint32_t group_grid = 0;
  std::uint32_t c_in = 0;
  std::uint32_t c_out = 0;
  DType dtype = DType::f32;
};

/// Throws InvalidKernelSize for dilated plain layers, which the format cannot express.
template <typename T>
void append_layer(std::vector<std::byte>& out, const AnyLayer<T>& layer);

template <typename T>
std::vector<std::byte> serialize_layers(std::span<const AnyLayer<T>> layers);

/// Reads every record; throws FormatError (bad magic, truncation, unknown
/// grid or dtype, empty file).
template <typename T>
std::vector<AnyLayer<T>> deserialize_layers(std::span<const std::byte> bytes);

/// Headers of every record, without converting weights.
std::vector<SpwtHeader> read_spwt_headers(std::span<const std::byte> bytes);

}  // namespace sparsekern
