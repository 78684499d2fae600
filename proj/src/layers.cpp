// SPDX-License-Identifier: Apache-2.0
#include "sparsekern/layers.hpp"

#include <algorithm>
#include <cmath>

#include "sparsekern/errors.hpp"

namespace sparsekern {

template <typename T>
PlainConvLayer<T>::PlainConvLayer(OffsetPattern p, std::size_t ci, std::size_t co)
    : pattern(std::move(p)), c_in(ci), c_out(co) {
  if (c_in == 0 || c_out == 0) throw ShapeError("channel counts must be positive");
  weights.assign(pattern.size() * c_in * c_out, T{0});
}

template <typename T>
void PlainConvLayer<T>::validate() const {
  if (c_in == 0 || c_out == 0 || weights.size() != pattern.size() * c_in * c_out) {
    throw ShapeError("plain layer weights do not match |K| x c_in x c_out");
  }
}

template <typename T>
SwpConvLayer<T>::SwpConvLayer(int kernel_size, std::size_t ci, std::size_t co)
    : gmap(partition_offsets(kernel_size)), pattern(enumerate_offsets(kernel_size)), c_in(ci), c_out(co) {
  if (c_in == 0 || c_out == 0) throw ShapeError("channel counts must be positive");
  weights.assign(GroupMap::kGroups * c_in * c_out, T{0});
  embedding.assign(pattern.size() * c_in, T{0});
}

template <typename T>
void SwpConvLayer<T>::validate() const {
  if (pattern.kind != PatternKind::dense || pattern.kernel_size != gmap.kernel_size) {
    throw PartitionMismatch("layer pattern and group map disagree on kernel size");
  }
  if (c_in == 0 || c_out == 0 || weights.size() != GroupMap::kGroups * c_in * c_out ||
      embedding.size() != pattern.size() * c_in) {
    throw ShapeError("partition layer weights do not match 27 x c_in x c_out and |K| x c_in");
  }
}

template <typename T>
PlainConvLayer<T> SwpConvLayer<T>::tiled() const {
  PlainConvLayer<T> plain(pattern, c_in, c_out);
  for (std::size_t k = 0; k < pattern.size(); ++k) std::ranges::copy(group_slice(gmap.assign[k]), plain.slice(k).begin());
  return plain;
}

template <typename T>
PlainConvLayer<T> init_plain_layer(OffsetPattern pattern, std::size_t c_in, std::size_t c_out, SplitMix64& rng) {
  PlainConvLayer<T> layer(std::move(pattern), c_in, c_out);
  const double bound = 1.0 / std::sqrt(static_cast<double>(layer.pattern.size() * c_in));
  for (T& w : layer.weights) w = static_cast<T>(rng.uniform(-bound, bound));
  return layer;
}

template <typename T>
SwpConvLayer<T> init_swp_layer(int kernel_size, std::size_t c_in, std::size_t c_out, SplitMix64& rng) {
  SwpConvLayer<T> layer(kernel_size, c_in, c_out);
  const double bound = 1.0 / std::sqrt(static_cast<double>(GroupMap::kGroups * c_in));
  for (T& w : layer.weights) w = static_cast<T>(rng.uniform(-bound, bound));
  return layer;
}

template struct PlainConvLayer<float>;
template struct PlainConvLayer<double>;
template struct SwpConvLayer<float>;
template struct SwpConvLayer<double>;
template PlainConvLayer<float> init_plain_layer<float>(OffsetPattern, std::size_t, std::size_t, SplitMix64&);
template PlainConvLayer<double> init_plain_layer<double>(OffsetPattern, std::size_t, std::size_t, SplitMix64&);
template SwpConvLayer<float> init_swp_layer<float>(int, std::size_t, std::size_t, SplitMix64&);
template SwpConvLayer<double> init_swp_layer<double>(int, std::size_t, std::size_t, SplitMix64&);

}  // namespace sparsekern
