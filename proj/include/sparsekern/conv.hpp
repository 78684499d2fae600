// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "sparsekern/kernel_map.hpp"
#include "sparsekern/layers.hpp"
#include "sparsekern/matrix.hpp"
#include "sparsekern/sparse_tensor.hpp"

namespace sparsekern {

/// Counts weight multiplications (vector-matrix products of a c_in row by a
/// c_in x c_out slice) executed by a forward pass.
struct ConvStats {
  bool record_per_output = false;
  std::uint64_t products = 0;
  std::vector<std::uint32_t> per_output;  ///< filled when record_per_output
};

/// Gradients of a layer for one backward pass. `d_embedding` is empty for
/// plain layers.
template <typename T>
struct LayerGrads {
  std::vector<T> d_weights;
  std::vector<T> d_embedding;
  Matrix<T> d_input;
};

/// y[j] = sum over pairs (i -> j) at offset k of x[i] * W[k].
/// Throws ShapeError on channel or site mismatches with the map.
template <typename T>
Matrix<T> conv_forward_plain(const SparseTensor<T>& x, const PlainConvLayer<T>& layer, const KernelMap& kmap,
                             ConvStats* stats = nullptr);

/// Training path of the partition convolution over a per-offset map:
/// y[j] = sum_k (x[i] + E[k]) * W[group(k)], with E added only where a pair
/// exists. Within each output row the shifted inputs of a group are summed
/// in offset order and the group sums are multiplied in group order, which
/// makes this bitwise equal to swp_forward_shrunk.
template <typename T>
Matrix<T> swp_forward_train(const SparseTensor<T>& x, const SwpConvLayer<T>& layer, const KernelMap& kmap);

/// Inference path over a grouped map: one product per non-empty group.
template <typename T>
Matrix<T> swp_forward_shrunk(const SparseTensor<T>& x, const SwpConvLayer<T>& layer, const GroupedKernelMap& gkmap,
                             ConvStats* stats = nullptr);

/// Adjoint of conv_forward_plain for upstream gradient dY (n_out x c_out).
template <typename T>
LayerGrads<T> conv_backward_plain(const SparseTensor<T>& x, const PlainConvLayer<T>& layer, const KernelMap& kmap,
                                  const Matrix<T>& dy);

/// Adjoint of swp_forward_train. dE rows of offsets with no pairs stay zero.
template <typename T>
LayerGrads<T> swp_backward(const SparseTensor<T>& x, const SwpConvLayer<T>& layer, const KernelMap& kmap,
                           const Matrix<T>& dy);

}  // namespace sparsekern
