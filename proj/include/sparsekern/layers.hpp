// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "sparsekern/offsets.hpp"
#include "sparsekern/rng.hpp"

namespace sparsekern {

/// Plain sparse convolution: one c_in x c_out weight slice per offset, no bias.
template <typename T>
struct PlainConvLayer {
  OffsetPattern pattern;
  std::size_t c_in = 0;
  std::size_t c_out = 0;
  std::vector<T> weights;  ///< [offset][c_in][c_out]

  PlainConvLayer() = default;
  /// Zero weights. Throws ShapeError for zero channel counts.
  PlainConvLayer(OffsetPattern pattern, std::size_t c_in, std::size_t c_out);

  std::span<T> slice(std::size_t k) noexcept { return {weights.data() + k * c_in * c_out, c_in * c_out}; }
  std::span<const T> slice(std::size_t k) const noexcept { return {weights.data() + k * c_in * c_out, c_in * c_out}; }
  std::size_t param_count() const noexcept { return weights.size(); }
  /// Throws ShapeError if `weights` does not match the pattern and channels.
  void validate() const;
};

/// Spatial-wise partition convolution: 27 shared c_in x c_out group weights
/// plus a per-offset position embedding added to gathered inputs.
template <typename T>
struct SwpConvLayer {
  GroupMap gmap;
  OffsetPattern pattern;  ///< dense, size gmap.kernel_size
  std::size_t c_in = 0;
  std::size_t c_out = 0;
  std::vector<T> weights;    ///< [group][c_in][c_out]
  std::vector<T> embedding;  ///< [offset][c_in]

  SwpConvLayer() = default;
  /// Zero weights and embedding. Throws InvalidKernelSize, ShapeError.
  SwpConvLayer(int kernel_size, std::size_t c_in, std::size_t c_out);

  int kernel_size() const noexcept { return gmap.kernel_size; }
  std::span<T> group_slice(std::size_t g) noexcept { return {weights.data() + g * c_in * c_out, c_in * c_out}; }
  std::span<const T> group_slice(std::size_t g) const noexcept { return {weights.data() + g * c_in * c_out, c_in * c_out}; }
  std::span<T> embed(std::size_t k) noexcept { return {embedding.data() + k * c_in, c_in}; }
  std::span<const T> embed(std::size_t k) const noexcept { return {embedding.data() + k * c_in, c_in}; }
  std::size_t param_count() const noexcept { return weights.size() + embedding.size(); }
  void validate() const;

  /// Plain layer whose slice k is the weight of k's group.
  PlainConvLayer<T> tiled() const;
};

/// Uniform in +-1/sqrt(fan_in), fan_in = |pattern| * c_in.
template <typename T>
PlainConvLayer<T> init_plain_layer(OffsetPattern pattern, std::size_t c_in, std::size_t c_out, SplitMix64& rng);

/// Group weights uniform in +-1/sqrt(27 * c_in); embedding zero.
template <typename T>
SwpConvLayer<T> init_swp_layer(int kernel_size, std::size_t c_in, std::size_t c_out, SplitMix64& rng);

}  // namespace sparsekern
