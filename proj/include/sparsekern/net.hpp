// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sparsekern/checkpoint.hpp"
#include "sparsekern/conv.hpp"

namespace sparsekern {

enum class MapKind { submanifold, regular_stride2 };

/// One convolution followed by an optional rectifier and an optional
/// identity shortcut: out = act(conv(x)) + (residual ? x : 0).
template <typename T>
struct Block {
  AnyLayer<T> conv;
  bool relu = false;
  bool residual = false;
  MapKind map = MapKind::submanifold;

  std::size_t c_in() const;
  std::size_t c_out() const;
};

template <typename T>
struct Net {
  std::vector<Block<T>> blocks;

  /// Throws ChannelChainError when channels do not chain from
  /// `input_channels`, or a residual block changes width or sites.
  void validate(std::size_t input_channels) const;
  std::size_t out_channels() const { return blocks.back().c_out(); }
};

/// Everything a backward pass needs from a forward pass.
template <typename T>
struct NetTrace {
  std::vector<SparseTensor<T>> inputs;     ///< input of each block
  std::vector<KernelMap> maps;
  std::vector<Matrix<T>> pre_activation;   ///< conv output of each block
  std::vector<SparseTensor<T>> outputs;    ///< output of each block
};

template <typename T>
struct NetGrads {
  std::vector<LayerGrads<T>> blocks;
  Matrix<T> d_input;
};

template <typename T>
NetTrace<T> net_trace(const Net<T>& net, const SparseTensor<T>& x);

/// Per-block outputs of a sequential pass.
template <typename T>
std::vector<SparseTensor<T>> net_forward(const Net<T>& net, const SparseTensor<T>& x);

/// Backpropagates `d_output` (gradient of the last block output).
template <typename T>
NetGrads<T> net_backward(const Net<T>& net, const NetTrace<T>& trace, const Matrix<T>& d_output);

template <typename T>
struct TrainStep {
  Net<T> net;   ///< parameters after the update
  double loss;  ///< loss before the update
};

/// Mean softmax cross-entropy over the final output rows, followed by one
/// plain gradient-descent update. Throws LabelError for out-of-range labels
/// or a label count that differs from the output row count.
template <typename T>
TrainStep<T> train_step(const Net<T>& net, const SparseTensor<T>& x, std::span<const int> labels, double learning_rate);

/// Loss without an update.
template <typename T>
double evaluate_loss(const Net<T>& net, const SparseTensor<T>& x, std::span<const int> labels);

enum class DeskVariant { plain, swp };

/// Three submanifold blocks, in_channels -> 16 -> 16 -> 16, rectifiers on
/// every block and identity shortcuts on blocks 2 and 3. The plain variant
/// uses 3^3 kernels throughout; the swp variant swaps blocks 1-2 for
/// partition convolutions of size `swp_kernel` and keeps block 3 plain.
/// A non-zero `classes` appends a 1^3 plain head without rectifier.
template <typename T>
Net<T> make_desk_net(DeskVariant variant, std::size_t in_channels, std::uint64_t seed, int swp_kernel = 7,
                     std::size_t classes = 0);

/// Linear stack of submanifold layers, rectifier between layers when `relu`.
template <typename T>
Net<T> net_from_layers(std::vector<AnyLayer<T>> layers, bool relu);

}  // namespace sparsekern
