// SPDX-License-Identifier: Apache-2.0
#include "sparsekern/checkpoint.hpp"

#include "sparsekern/bytes.hpp"

namespace sparsekern {

template <typename T>
void append_layer(std::vector<std::byte>& out, const AnyLayer<T>& layer) {
  ByteWriter w;
  w.raw(kSpwtMagic);
  std::visit(
      [&](const auto& l) {
        using L = std::decay_t<decltype(l)>;
        l.validate();
        if constexpr (std::is_same_v<L, PlainConvLayer<T>>) {
          if (l.pattern.kind != PatternKind::dense) throw InvalidKernelSize("SPWT stores dense plain layers only");
          w.put(static_cast<std::uint32_t>(l.pattern.kernel_size));
          w.put(std::uint32_t{0});
        } else {
          w.put(static_cast<std::uint32_t>(l.kernel_size()));
          w.put(static_cast<std::uint32_t>(GroupMap::kGrid));
        }
        w.put(static_cast<std::uint32_t>(l.c_in));
        w.put(static_cast<std::uint32_t>(l.c_out));
        w.put(static_cast<std::uint8_t>(dtype_of<T>()));
        for (T v : l.weights) w.put(v);
        if constexpr (std::is_same_v<L, SwpConvLayer<T>>) {
          for (T v : l.embedding) w.put(v);
        }
      },
      layer);
  auto bytes = std::move(w).take();
  out.insert(out.end(), bytes.begin(), bytes.end());
}

template <typename T>
std::vector<std::byte> serialize_layers(std::span<const AnyLayer<T>> layers) {
  std::vector<std::byte> out;
  for (const auto& l : layers) append_layer(out, l);
  return out;
}

namespace {

SpwtHeader read_header(ByteReader& r) {
  r.expect_raw(kSpwtMagic, "SPWT1");
  SpwtHeader h;
  const auto size_at = r.offset();
  h.kernel_size = r.get<std::uint32_t>("kernel size");
  if (h.kernel_size == 0 || h.kernel_size % 2 == 0 || h.kernel_size > 255) {
    throw FormatError("invalid kernel size " + std::to_string(h.kernel_size), size_at);
  }
  const auto grid_at = r.offset();
  h.group_grid = r.get<std::uint32_t>("group grid size");
  if (h.group_grid != 0 && h.group_grid != GroupMap::kGrid) {
    throw FormatError("unsupported group grid " + std::to_string(h.group_grid), grid_at);
  }
  if (h.group_grid == GroupMap::kGrid && h.kernel_size < 3) {
    throw FormatError("partition layers need kernel size >= 3", size_at);
  }
  const auto channels_at = r.offset();
  h.c_in = r.get<std::uint32_t>("c_in");
  h.c_out = r.get<std::uint32_t>("c_out");
  if (h.c_in == 0 || h.c_out == 0) throw FormatError("channel counts must be positive", channels_at);
  const auto dtype_at = r.offset();
  const auto dtype = r.get<std::uint8_t>("dtype");
  if (dtype > 1) throw FormatError("unknown dtype " + std::to_string(dtype), dtype_at);
  h.dtype = static_cast<DType>(dtype);
  return h;
}

std::uint64_t payload_values(const SpwtHeader& h) {
  const std::uint64_t volume = std::uint64_t{h.kernel_size} * h.kernel_size * h.kernel_size;
  const std::uint64_t slices = h.group_grid == 0 ? volume : GroupMap::kGroups;
  return slices * h.c_in * h.c_out + (h.group_grid == 0 ? 0 : volume * h.c_in);
}

template <typename T>
T read_value(ByteReader& r, DType d) {
  return d == DType::f32 ? static_cast<T>(r.get<float>("weights")) : static_cast<T>(r.get<double>("weights"));
}

}  // namespace

template <typename T>
std::vector<AnyLayer<T>> deserialize_layers(std::span<const std::byte> bytes) {
  if (bytes.empty()) throw FormatError("empty model file", 0);
  ByteReader r(bytes);
  std::vector<AnyLayer<T>> layers;
  while (r.remaining() > 0) {
    const SpwtHeader h = read_header(r);
    r.need(payload_values(h) * dtype_size(h.dtype), "weights");
    if (h.group_grid == 0) {
      PlainConvLayer<T> l(enumerate_offsets(static_cast<int>(h.kernel_size)), h.c_in, h.c_out);
      for (T& v : l.weights) v = read_value<T>(r, h.dtype);
      layers.emplace_back(std::move(l));
    } else {
      SwpConvLayer<T> l(static_cast<int>(h.kernel_size), h.c_in, h.c_out);
      for (T& v : l.weights) v = read_value<T>(r, h.dtype);
      for (T& v : l.embedding) v = read_value<T>(r, h.dtype);
      layers.emplace_back(std::move(l));
    }
  }
  return layers;
}

std::vector<SpwtHeader> read_spwt_headers(std::span<const std::byte> bytes) {
  if (bytes.empty()) throw FormatError("empty model file", 0);
  ByteReader r(bytes);
  std::vector<SpwtHeader> headers;
  while (r.remaining() > 0) {
    headers.push_back(read_header(r));
    const std::uint64_t n = payload_values(headers.back()) * dtype_size(headers.back().dtype);
    r.skip(n, "weights");
  }
  return headers;
}

template void append_layer<float>(std::vector<std::byte>&, const AnyLayer<float>&);
template void append_layer<double>(std::vector<std::byte>&, const AnyLayer<double>&);
template std::vector<std::byte> serialize_layers<float>(std::span<const AnyLayer<float>>);
template std::vector<std::byte> serialize_layers<double>(std::span<const AnyLayer<double>>);
template std::vector<AnyLayer<float>> deserialize_layers<float>(std::span<const std::byte>);
template std::vector<AnyLayer<double>> deserialize_layers<double>(std::span<const std::byte>);

}  // namespace sparsekern
