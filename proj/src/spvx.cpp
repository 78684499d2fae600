// SPDX-License-Identifier: Apache-2.0
#include "sparsekern/spvx.hpp"

#include <fstream>
#include <iterator>

#include "sparsekern/bytes.hpp"

namespace sparsekern {

std::vector<std::byte> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::vector<std::byte> out(raw.size());
  std::memcpy(out.data(), raw.data(), raw.size());
  return out;
}

void write_file(const std::filesystem::path& path, std::span<const std::byte> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("short write to " + path.string());
}

template <typename T>
std::vector<std::byte> serialize_spvx(const SparseTensor<T>& tensor) {
  ByteWriter w;
  w.raw(kSpvxMagic);
  w.put(kSpvxVersion);
  w.put(static_cast<std::uint32_t>(tensor.size()));
  w.put(static_cast<std::uint32_t>(tensor.channels()));
  w.put(static_cast<std::uint8_t>(dtype_of<T>()));
  for (const Coord3& c : tensor.coords()) {
    w.put(c.x);
    w.put(c.y);
    w.put(c.z);
  }
  for (T v : tensor.features().data()) w.put(v);
  return std::move(w).take();
}

namespace {

SpvxHeader read_header(ByteReader& r) {
  r.expect_raw(kSpvxMagic, "SPVX1");
  SpvxHeader h;
  const auto version_at = r.offset();
  h.version = r.get<std::uint32_t>("version");
  if (h.version != kSpvxVersion) throw FormatError("unsupported version " + std::to_string(h.version), version_at);
  h.n = r.get<std::uint32_t>("site count");
  h.channels = r.get<std::uint32_t>("channel count");
  const auto dtype_at = r.offset();
  const auto dtype = r.get<std::uint8_t>("dtype");
  if (dtype > 1) throw FormatError("unknown dtype " + std::to_string(dtype), dtype_at);
  h.dtype = static_cast<DType>(dtype);
  return h;
}

}  // namespace

SpvxHeader read_spvx_header(std::span<const std::byte> bytes) {
  ByteReader r(bytes);
  return read_header(r);
}

template <typename T>
SparseTensor<T> deserialize_spvx(std::span<const std::byte> bytes) {
  ByteReader r(bytes);
  const SpvxHeader h = read_header(r);
  const auto payload = static_cast<unsigned __int128>(h.n) * 12 +
                       static_cast<unsigned __int128>(h.n) * h.channels * dtype_size(h.dtype);
  if (payload > r.remaining()) throw FormatError("truncated payload", bytes.size());

  std::vector<Coord3> coords(h.n);
  for (std::uint32_t i = 0; i < h.n; ++i) {
    const auto at = r.offset();
    Coord3 c;
    c.x = r.get<std::int32_t>("coordinates");
    c.y = r.get<std::int32_t>("coordinates");
    c.z = r.get<std::int32_t>("coordinates");
    if (i > 0 && !(coords[i - 1] < c)) {
      throw FormatError("coordinate " + to_string(c) + " breaks canonical order", at);
    }
    coords[i] = c;
  }

  Matrix<T> features(h.n, h.channels);
  for (auto& v : features.data()) {
    v = h.dtype == DType::f32 ? static_cast<T>(r.get<float>("features")) : static_cast<T>(r.get<double>("features"));
  }
  if (r.remaining() != 0) throw FormatError("trailing bytes after features", r.offset());
  return SparseTensor<T>(std::make_shared<const VoxelSet>(std::move(coords)), std::move(features));
}

template std::vector<std::byte> serialize_spvx<float>(const SparseTensor<float>&);
template std::vector<std::byte> serialize_spvx<double>(const SparseTensor<double>&);
template SparseTensor<float> deserialize_spvx<float>(std::span<const std::byte>);
template SparseTensor<double> deserialize_spvx<double>(std::span<const std::byte>);

}  // namespace sparsekern
