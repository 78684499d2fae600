// SPDX-License-Identifier: Apache-2.0
#include "sparsekern/net.hpp"

#include <algorithm>
#include <cmath>

namespace sparsekern {

template <typename T>
std::size_t Block<T>::c_in() const {
  return std::visit([](const auto& l) { return l.c_in; }, conv);
}

template <typename T>
std::size_t Block<T>::c_out() const {
  return std::visit([](const auto& l) { return l.c_out; }, conv);
}

template <typename T>
void Net<T>::validate(std::size_t input_channels) const {
  if (blocks.empty()) throw ChannelChainError("network has no blocks");
  std::size_t width = input_channels;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const Block<T>& blk = blocks[b];
    if (blk.c_in() != width) {
      throw ChannelChainError("block " + std::to_string(b) + " expects " + std::to_string(blk.c_in()) +
                              " channels but receives " + std::to_string(width));
    }
    if (blk.residual && (blk.c_in() != blk.c_out() || blk.map != MapKind::submanifold)) {
      throw ChannelChainError("residual block " + std::to_string(b) + " must keep its width and sites");
    }
    width = blk.c_out();
  }
}

namespace {

const OffsetPattern& pattern_of(const auto& layer) { return layer.pattern; }

template <typename T>
KernelMap map_for(const Block<T>& blk, const SparseTensor<T>& x) {
  const OffsetPattern& pattern = std::visit([](const auto& l) -> const OffsetPattern& { return pattern_of(l); }, blk.conv);
  return blk.map == MapKind::submanifold ? build_kernel_map_submanifold(x, pattern)
                                         : build_kernel_map_regular(x, pattern, 2);
}

template <typename T>
Matrix<T> conv_forward(const Block<T>& blk, const SparseTensor<T>& x, const KernelMap& kmap) {
  if (const auto* plain = std::get_if<PlainConvLayer<T>>(&blk.conv)) return conv_forward_plain(x, *plain, kmap);
  return swp_forward_train(x, std::get<SwpConvLayer<T>>(blk.conv), kmap);
}

template <typename T>
LayerGrads<T> conv_backward(const Block<T>& blk, const SparseTensor<T>& x, const KernelMap& kmap, const Matrix<T>& dy) {
  if (const auto* plain = std::get_if<PlainConvLayer<T>>(&blk.conv)) return conv_backward_plain(x, *plain, kmap, dy);
  return swp_backward(x, std::get<SwpConvLayer<T>>(blk.conv), kmap, dy);
}

}  // namespace

template <typename T>
NetTrace<T> net_trace(const Net<T>& net, const SparseTensor<T>& x) {
  net.validate(x.channels());
  NetTrace<T> trace;
  SparseTensor<T> current = x;
  for (const Block<T>& blk : net.blocks) {
    KernelMap kmap = map_for(blk, current);
    Matrix<T> pre = conv_forward(blk, current, kmap);
    Matrix<T> out = pre;
    if (blk.relu) {
      for (T& v : out.data()) v = std::max(v, T{0});
    }
    if (blk.residual) {
      auto o = out.data();
      auto in = current.features().data();
      for (std::size_t i = 0; i < o.size(); ++i) o[i] += in[i];
    }
    SparseTensor<T> next(kmap.outputs, std::move(out));
    trace.inputs.push_back(std::move(current));
    trace.maps.push_back(std::move(kmap));
    trace.pre_activation.push_back(std::move(pre));
    trace.outputs.push_back(next);
    current = std::move(next);
  }
  return trace;
}

template <typename T>
std::vector<SparseTensor<T>> net_forward(const Net<T>& net, const SparseTensor<T>& x) {
  return net_trace(net, x).outputs;
}

template <typename T>
NetGrads<T> net_backward(const Net<T>& net, const NetTrace<T>& trace, const Matrix<T>& d_output) {
  NetGrads<T> grads;
  grads.blocks.resize(net.blocks.size());
  Matrix<T> upstream = d_output;
  for (std::size_t b = net.blocks.size(); b-- > 0;) {
    const Block<T>& blk = net.blocks[b];
    Matrix<T> d_pre = upstream;
    if (blk.relu) {
      auto d = d_pre.data();
      auto pre = trace.pre_activation[b].data();
      for (std::size_t i = 0; i < d.size(); ++i) {
        if (!(pre[i] > T{0})) d[i] = T{0};
      }
    }
    LayerGrads<T> g = conv_backward(blk, trace.inputs[b], trace.maps[b], d_pre);
    if (blk.residual) {
      auto dx = g.d_input.data();
      auto up = upstream.data();
      for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += up[i];
    }
    upstream = g.d_input;
    grads.blocks[b] = std::move(g);
  }
  grads.d_input = std::move(upstream);
  return grads;
}

namespace {

// Mean cross-entropy and its gradient with respect to the logits.
template <typename T>
double softmax_cross_entropy(const Matrix<T>& logits, std::span<const int> labels, Matrix<T>* grad) {
  if (labels.size() != logits.rows()) {
    throw LabelError(std::to_string(labels.size()) + " labels for " + std::to_string(logits.rows()) + " output sites");
  }
  const std::size_t classes = logits.cols();
  const double n = static_cast<double>(logits.rows());
  if (grad) *grad = Matrix<T>(logits.rows(), classes);
  double total = 0.0;
  std::vector<double> p(classes);
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    const int label = labels[i];
    if (label < 0 || static_cast<std::size_t>(label) >= classes) {
      throw LabelError("label " + std::to_string(label) + " outside [0, " + std::to_string(classes) + ")");
    }
    auto row = logits.row(i);
    double m = row[0];
    for (T v : row) m = std::max(m, static_cast<double>(v));
    double z = 0.0;
    for (std::size_t c = 0; c < classes; ++c) z += p[c] = std::exp(static_cast<double>(row[c]) - m);
    total += m + std::log(z) - static_cast<double>(row[label]);
    if (grad) {
      for (std::size_t c = 0; c < classes; ++c) {
        (*grad)(i, c) = static_cast<T>((p[c] / z - (static_cast<std::size_t>(label) == c ? 1.0 : 0.0)) / n);
      }
    }
  }
  return total / n;
}

template <typename T>
void descend(std::vector<T>& params, const std::vector<T>& grads, double lr) {
  for (std::size_t i = 0; i < params.size(); ++i) params[i] -= static_cast<T>(lr * static_cast<double>(grads[i]));
}

}  // namespace

template <typename T>
TrainStep<T> train_step(const Net<T>& net, const SparseTensor<T>& x, std::span<const int> labels, double learning_rate) {
  const NetTrace<T> trace = net_trace(net, x);
  Matrix<T> d_logits;
  const double loss = softmax_cross_entropy(trace.outputs.back().features(), labels, &d_logits);
  const NetGrads<T> grads = net_backward(net, trace, d_logits);

  Net<T> updated = net;
  for (std::size_t b = 0; b < updated.blocks.size(); ++b) {
    std::visit(
        [&](auto& layer) {
          descend(layer.weights, grads.blocks[b].d_weights, learning_rate);
          if constexpr (std::is_same_v<std::decay_t<decltype(layer)>, SwpConvLayer<T>>) {
            descend(layer.embedding, grads.blocks[b].d_embedding, learning_rate);
          }
        },
        updated.blocks[b].conv);
  }
  return {std::move(updated), loss};
}

template <typename T>
double evaluate_loss(const Net<T>& net, const SparseTensor<T>& x, std::span<const int> labels) {
  const auto outputs = net_forward(net, x);
  return softmax_cross_entropy<T>(outputs.back().features(), labels, nullptr);
}

template <typename T>
Net<T> make_desk_net(DeskVariant variant, std::size_t in_channels, std::uint64_t seed, int swp_kernel,
                     std::size_t classes) {
  constexpr std::size_t kWidth = 16;
  SplitMix64 rng(seed);
  auto layer = [&](std::size_t ci, std::size_t co, bool partitioned) -> AnyLayer<T> {
    if (partitioned) return init_swp_layer<T>(swp_kernel, ci, co, rng);
    return init_plain_layer<T>(enumerate_offsets(3), ci, co, rng);
  };
  const bool swp = variant == DeskVariant::swp;
  Net<T> net;
  net.blocks.push_back({layer(in_channels, kWidth, swp), true, false, MapKind::submanifold});
  net.blocks.push_back({layer(kWidth, kWidth, swp), true, true, MapKind::submanifold});
  net.blocks.push_back({layer(kWidth, kWidth, false), true, true, MapKind::submanifold});
  if (classes > 0) {
    net.blocks.push_back({init_plain_layer<T>(enumerate_offsets(1), kWidth, classes, rng), false, false,
                          MapKind::submanifold});
  }
  return net;
}

template <typename T>
Net<T> net_from_layers(std::vector<AnyLayer<T>> layers, bool relu) {
  Net<T> net;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const bool last = i + 1 == layers.size();
    net.blocks.push_back({std::move(layers[i]), relu && !last, false, MapKind::submanifold});
  }
  return net;
}

#define SPARSEKERN_INSTANTIATE(T)                                                                              \
  template struct Block<T>;                                                                                    \
  template struct Net<T>;                                                                                      \
  template NetTrace<T> net_trace<T>(const Net<T>&, const SparseTensor<T>&);                                    \
  template std::vector<SparseTensor<T>> net_forward<T>(const Net<T>&, const SparseTensor<T>&);                 \
  template NetGrads<T> net_backward<T>(const Net<T>&, const NetTrace<T>&, const Matrix<T>&);                   \
  template TrainStep<T> train_step<T>(const Net<T>&, const SparseTensor<T>&, std::span<const int>, double);    \
  template double evaluate_loss<T>(const Net<T>&, const SparseTensor<T>&, std::span<const int>);               \
  template Net<T> make_desk_net<T>(DeskVariant, std::size_t, std::uint64_t, int, std::size_t);                 \
  template Net<T> net_from_layers<T>(std::vector<AnyLayer<T>>, bool);

SPARSEKERN_INSTANTIATE(float)
SPARSEKERN_INSTANTIATE(double)

#undef SPARSEKERN_INSTANTIATE

}  // namespace sparsekern
