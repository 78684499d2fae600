// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "sparsekern/errors.hpp"

namespace sparsekern {

/// Little-endian encoder shared by the on-disk formats.
class ByteWriter {
 public:
  void raw(std::string_view s) {
    for (char ch : s) out_.push_back(static_cast<std::byte>(ch));
  }

  template <typename V>
    requires std::is_arithmetic_v<V>
  void put(V value) {
    using U = std::conditional_t<sizeof(V) == 1, std::uint8_t,
              std::conditional_t<sizeof(V) == 4, std::uint32_t, std::uint64_t>>;
    static_assert(sizeof(V) == sizeof(U));
    const auto bits = std::bit_cast<U>(value);
    for (std::size_t i = 0; i < sizeof(U); ++i) out_.push_back(static_cast<std::byte>((bits >> (8 * i)) & 0xFF));
  }

  std::vector<std::byte> take() && { return std::move(out_); }
  std::size_t size() const noexcept { return out_.size(); }

 private:
  std::vector<std::byte> out_;
};

/// Little-endian decoder; every short read throws FormatError at the offset
/// where the stream ends.
class ByteReader {
 public:
  explicit ByteReader(std::span<const std::byte> in) : in_(in) {}

  std::uint64_t offset() const noexcept { return pos_; }
  std::size_t remaining() const noexcept { return in_.size() - pos_; }

  void expect_raw(std::string_view magic, const char* what) {
    need(magic.size(), what);
    if (std::memcmp(in_.data() + pos_, magic.data(), magic.size()) != 0) {
      throw FormatError(std::string("bad magic, expected ") + what, pos_);
    }
    pos_ += magic.size();
  }

  template <typename V>
    requires std::is_arithmetic_v<V>
  V get(const char* what) {
    using U = std::conditional_t<sizeof(V) == 1, std::uint8_t,
              std::conditional_t<sizeof(V) == 4, std::uint32_t, std::uint64_t>>;
    need(sizeof(U), what);
    U bits = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) bits |= static_cast<U>(std::to_integer<std::uint8_t>(in_[pos_ + i])) << (8 * i);
    pos_ += sizeof(U);
    return std::bit_cast<V>(bits);
  }

  void skip(std::size_t n, const char* what) {
    need(n, what);
    pos_ += n;
  }

  void need(std::size_t n, const char* what) const {
    if (in_.size() - pos_ < n) throw FormatError(std::string("truncated while reading ") + what, in_.size());
  }

 private:
  std::span<const std::byte> in_;
  std::size_t pos_ = 0;
};

std::vector<std::byte> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::byte> bytes);

}  // namespace sparsekern
