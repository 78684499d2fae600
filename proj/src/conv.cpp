// SPDX-License-Identifier: Apache-2.0
#include "sparsekern/conv.hpp"

#include <algorithm>

#include "sparsekern/parallel.hpp"

namespace sparsekern {

namespace {

// y += x * W for one c_in row and a c_in x c_out slice. Every forward path
// funnels through this routine so equal inputs give equal bits.
template <typename T>
inline void vecmat_acc(T* __restrict y, const T* __restrict x, const T* __restrict w, std::size_t ci, std::size_t co) {
  for (std::size_t a = 0; a < ci; ++a) {
    const T xv = x[a];
    const T* wr = w + a * co;
    for (std::size_t b = 0; b < co; ++b) y[b] += xv * wr[b];
  }
}

// acc += x + e
template <typename T>
inline void add_shifted(T* __restrict acc, const T* __restrict x, const T* __restrict e, std::size_t n) {
  for (std::size_t a = 0; a < n; ++a) acc[a] += x[a] + e[a];
}

// d += outer(x, dy)
template <typename T>
inline void outer_acc(T* __restrict d, const T* __restrict x, const T* __restrict dy, std::size_t ci, std::size_t co) {
  for (std::size_t a = 0; a < ci; ++a) {
    const T xv = x[a];
    T* dr = d + a * co;
    for (std::size_t b = 0; b < co; ++b) dr[b] += xv * dy[b];
  }
}

// t = W * dy (c_in result)
template <typename T>
inline void matvec(T* __restrict t, const T* __restrict w, const T* __restrict dy, std::size_t ci, std::size_t co) {
  for (std::size_t a = 0; a < ci; ++a) {
    const T* wr = w + a * co;
    T s = 0;
    for (std::size_t b = 0; b < co; ++b) s += wr[b] * dy[b];
    t[a] = s;
  }
}

template <typename PairT>
std::size_t first_at_or_after(const std::vector<PairT>& list, std::size_t row) {
  if (row == 0) return 0;
  const auto it = std::ranges::lower_bound(list, static_cast<std::uint32_t>(row), {}, &PairT::out);
  return static_cast<std::size_t>(it - list.begin());
}

template <typename T>
void check_input(const SparseTensor<T>& x, std::size_t c_in, std::size_t n_in) {
  if (x.channels() != c_in) {
    throw ShapeError("input has " + std::to_string(x.channels()) + " channels, layer expects " + std::to_string(c_in));
  }
  if (x.size() != n_in) throw ShapeError("kernel map was built for a different input");
}

template <typename T>
void check_plain(const SparseTensor<T>& x, const PlainConvLayer<T>& layer, const KernelMap& kmap) {
  layer.validate();
  check_input(x, layer.c_in, kmap.n_in());
  if (!(kmap.pattern == layer.pattern) || kmap.pairs.size() != layer.pattern.size()) {
    throw ShapeError("kernel map was built for a different offset pattern");
  }
}

template <typename T>
void check_swp(const SparseTensor<T>& x, const SwpConvLayer<T>& layer, const KernelMap& kmap) {
  layer.validate();
  check_input(x, layer.c_in, kmap.n_in());
  if (kmap.pattern.kind != PatternKind::dense || kmap.pattern.kernel_size != layer.kernel_size() ||
      kmap.pairs.size() != layer.pattern.size()) {
    throw PartitionMismatch("kernel map size " + std::to_string(kmap.pattern.kernel_size) +
                            " does not match partition layer size " + std::to_string(layer.kernel_size()));
  }
}

template <typename T>
void check_dy(const Matrix<T>& dy, std::size_t n_out, std::size_t c_out) {
  if (dy.rows() != n_out || dy.cols() != c_out) throw ShapeError("upstream gradient shape does not match the output");
}

void start_stats(ConvStats* stats, std::size_t n_out) {
  if (stats && stats->record_per_output) stats->per_output.assign(n_out, 0);
}

}  // namespace

template <typename T>
Matrix<T> conv_forward_plain(const SparseTensor<T>& x, const PlainConvLayer<T>& layer, const KernelMap& kmap,
                             ConvStats* stats) {
  check_plain(x, layer, kmap);
  const std::size_t ci = layer.c_in, co = layer.c_out, n_out = kmap.n_out();
  Matrix<T> y(n_out, co);
  start_stats(stats, n_out);
  const auto ranges = split_range(n_out, 2048);
  std::vector<std::uint64_t> products(ranges.size(), 0);
  const T* xd = x.features().data().data();

  parallel_tasks(ranges.size(), [&](std::size_t t) {
    const auto [lo, hi] = ranges[t];
    for (std::size_t k = 0; k < kmap.pairs.size(); ++k) {
      const auto& list = kmap.pairs[k];
      const T* w = layer.slice(k).data();
      for (std::size_t p = first_at_or_after(list, lo); p < list.size() && list[p].out < hi; ++p) {
        vecmat_acc(y.row(list[p].out).data(), xd + list[p].in * ci, w, ci, co);
        ++products[t];
        if (stats && stats->record_per_output) ++stats->per_output[list[p].out];
      }
    }
  });
  if (stats) for (auto n : products) stats->products += n;
  return y;
}

template <typename T>
Matrix<T> swp_forward_train(const SparseTensor<T>& x, const SwpConvLayer<T>& layer, const KernelMap& kmap) {
  check_swp(x, layer, kmap);
  const std::size_t ci = layer.c_in, co = layer.c_out, n_out = kmap.n_out();
  Matrix<T> y(n_out, co);
  const auto ranges = split_range(n_out, 512);
  const T* xd = x.features().data().data();

  parallel_tasks(ranges.size(), [&](std::size_t t) {
    const auto [lo, hi] = ranges[t];
    std::vector<std::size_t> cursor(kmap.pairs.size());
    for (std::size_t k = 0; k < cursor.size(); ++k) cursor[k] = first_at_or_after(kmap.pairs[k], lo);
    std::vector<T> acc(ci);
    for (std::size_t j = lo; j < hi; ++j) {
      for (int g = 0; g < GroupMap::kGroups; ++g) {
        bool any = false;
        for (const auto k : layer.gmap.members[g]) {
          const auto& list = kmap.pairs[k];
          std::size_t& c = cursor[k];
          if (c < list.size() && list[c].out == j) {
            if (!any) std::ranges::fill(acc, T{0});
            add_shifted(acc.data(), xd + list[c].in * ci, layer.embed(k).data(), ci);
            ++c;
            any = true;
          }
        }
        if (any) vecmat_acc(y.row(j).data(), acc.data(), layer.group_slice(g).data(), ci, co);
      }
    }
  });
  return y;
}

template <typename T>
Matrix<T> swp_forward_shrunk(const SparseTensor<T>& x, const SwpConvLayer<T>& layer, const GroupedKernelMap& gkmap,
                             ConvStats* stats) {
  layer.validate();
  if (gkmap.kernel_size != layer.kernel_size()) {
    throw PartitionMismatch("grouped map size " + std::to_string(gkmap.kernel_size) +
                            " does not match partition layer size " + std::to_string(layer.kernel_size()));
  }
  check_input(x, layer.c_in, gkmap.n_in());
  const std::size_t ci = layer.c_in, co = layer.c_out, n_out = gkmap.n_out();
  Matrix<T> y(n_out, co);
  start_stats(stats, n_out);
  const auto ranges = split_range(n_out, 1024);
  std::vector<std::uint64_t> products(ranges.size(), 0);
  const T* xd = x.features().data().data();

  parallel_tasks(ranges.size(), [&](std::size_t t) {
    const auto [lo, hi] = ranges[t];
    std::array<std::size_t, GroupMap::kGroups> cursor{};
    for (int g = 0; g < GroupMap::kGroups; ++g) cursor[g] = first_at_or_after(gkmap.groups[g], lo);
    std::vector<T> acc(ci);
    for (std::size_t j = lo; j < hi; ++j) {
      for (int g = 0; g < GroupMap::kGroups; ++g) {
        const auto& list = gkmap.groups[g];
        std::size_t& c = cursor[g];
        if (c >= list.size() || list[c].out != j) continue;
        std::ranges::fill(acc, T{0});
        for (; c < list.size() && list[c].out == j; ++c) {
          add_shifted(acc.data(), xd + list[c].in * ci, layer.embed(list[c].offset).data(), ci);
        }
        vecmat_acc(y.row(j).data(), acc.data(), layer.group_slice(g).data(), ci, co);
        ++products[t];
        if (stats && stats->record_per_output) ++stats->per_output[j];
      }
    }
  });
  if (stats) for (auto n : products) stats->products += n;
  return y;
}

template <typename T>
LayerGrads<T> conv_backward_plain(const SparseTensor<T>& x, const PlainConvLayer<T>& layer, const KernelMap& kmap,
                                  const Matrix<T>& dy) {
  check_plain(x, layer, kmap);
  check_dy(dy, kmap.n_out(), layer.c_out);
  const std::size_t ci = layer.c_in, co = layer.c_out;
  LayerGrads<T> g{std::vector<T>(layer.weights.size(), T{0}), {}, Matrix<T>(x.size(), ci)};
  const T* xd = x.features().data().data();
  std::vector<T> t(ci);
  for (std::size_t k = 0; k < kmap.pairs.size(); ++k) {
    T* dw = g.d_weights.data() + k * ci * co;
    const T* w = layer.slice(k).data();
    for (const Pair& p : kmap.pairs[k]) {
      const T* dyr = dy.row(p.out).data();
      outer_acc(dw, xd + p.in * ci, dyr, ci, co);
      matvec(t.data(), w, dyr, ci, co);
      T* dx = g.d_input.row(p.in).data();
      for (std::size_t a = 0; a < ci; ++a) dx[a] += t[a];
    }
  }
  return g;
}

template <typename T>
LayerGrads<T> swp_backward(const SparseTensor<T>& x, const SwpConvLayer<T>& layer, const KernelMap& kmap,
                           const Matrix<T>& dy) {
  check_swp(x, layer, kmap);
  check_dy(dy, kmap.n_out(), layer.c_out);
  const std::size_t ci = layer.c_in, co = layer.c_out;
  LayerGrads<T> g{std::vector<T>(layer.weights.size(), T{0}), std::vector<T>(layer.embedding.size(), T{0}),
                  Matrix<T>(x.size(), ci)};
  const T* xd = x.features().data().data();
  std::vector<T> shifted(ci), t(ci);
  for (std::size_t k = 0; k < kmap.pairs.size(); ++k) {
    const std::size_t group = layer.gmap.assign[k];
    T* dw = g.d_weights.data() + group * ci * co;
    T* de = g.d_embedding.data() + k * ci;
    const T* w = layer.group_slice(group).data();
    const T* e = layer.embed(k).data();
    for (const Pair& p : kmap.pairs[k]) {
      const T* xr = xd + p.in * ci;
      for (std::size_t a = 0; a < ci; ++a) shifted[a] = xr[a] + e[a];
      const T* dyr = dy.row(p.out).data();
      outer_acc(dw, shifted.data(), dyr, ci, co);
      matvec(t.data(), w, dyr, ci, co);
      T* dx = g.d_input.row(p.in).data();
      for (std::size_t a = 0; a < ci; ++a) {
        dx[a] += t[a];
        de[a] += t[a];
      }
    }
  }
  return g;
}

#define SPARSEKERN_INSTANTIATE(T)                                                                                   \
  template Matrix<T> conv_forward_plain<T>(const SparseTensor<T>&, const PlainConvLayer<T>&, const KernelMap&,     \
                                           ConvStats*);                                                             \
  template Matrix<T> swp_forward_train<T>(const SparseTensor<T>&, const SwpConvLayer<T>&, const KernelMap&);       \
  template Matrix<T> swp_forward_shrunk<T>(const SparseTensor<T>&, const SwpConvLayer<T>&, const GroupedKernelMap&, \
                                           ConvStats*);                                                             \
  template LayerGrads<T> conv_backward_plain<T>(const SparseTensor<T>&, const PlainConvLayer<T>&, const KernelMap&, \
                                                const Matrix<T>&);                                                  \
  template LayerGrads<T> swp_backward<T>(const SparseTensor<T>&, const SwpConvLayer<T>&, const KernelMap&,         \
                                         const Matrix<T>&);

SPARSEKERN_INSTANTIATE(float)
SPARSEKERN_INSTANTIATE(double)

#undef SPARSEKERN_INSTANTIATE

}  // namespace sparsekern
