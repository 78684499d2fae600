// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <numeric>
#include <span>
#include <vector>

#include "sparsekern/coord.hpp"
#include "sparsekern/errors.hpp"
#include "sparsekern/matrix.hpp"

namespace sparsekern {

inline constexpr std::uint32_t kNoSite = 0xFFFFFFFFu;

/// Open-addressing hash from voxel coordinate to row, linear probing over a
/// power-of-two table kept at most half full.
class CoordIndex {
 public:
  CoordIndex() = default;

  /// Throws DuplicateCoord on the first repeated coordinate.
  explicit CoordIndex(std::span<const Coord3> coords);

  /// Row of `c`, or kNoSite.
  std::uint32_t find(const Coord3& c) const noexcept {
    if (slots_.empty()) return kNoSite;
    std::size_t slot = Coord3Hash{}(c) & mask_;
    while (true) {
      const Slot& s = slots_[slot];
      if (s.row == kNoSite) return kNoSite;
      if (s.key == c) return s.row;
      slot = (slot + 1) & mask_;
    }
  }

  bool contains(const Coord3& c) const noexcept { return find(c) != kNoSite; }
  std::size_t size() const noexcept { return size_; }

 private:
  struct Slot {
    Coord3 key;
    std::uint32_t row = kNoSite;
  };
  std::vector<Slot> slots_;
  std::size_t mask_ = 0;
  std::size_t size_ = 0;
};

/// Convenience spelling of the index builder.
inline CoordIndex build_index(std::span<const Coord3> coords) { return CoordIndex(coords); }

/// The active-site set of a sparse tensor: canonical (strictly increasing)
/// coordinates plus their index. Immutable; shared between tensors that live
/// on the same sites.
class VoxelSet {
 public:
  /// Sorts nothing: throws DuplicateCoord for repeats and std::invalid_argument
  /// if `coords` is not in canonical order.
  explicit VoxelSet(std::vector<Coord3> coords);

  std::span<const Coord3> coords() const noexcept { return coords_; }
  const Coord3& operator[](std::size_t i) const noexcept { return coords_[i]; }
  std::size_t size() const noexcept { return coords_.size(); }
  std::uint32_t find(const Coord3& c) const noexcept { return index_.find(c); }
  const CoordIndex& index() const noexcept { return index_; }

 private:
  std::vector<Coord3> coords_;
  CoordIndex index_;
};

using VoxelSetPtr = std::shared_ptr<const VoxelSet>;

/// Sorts `coords` lexicographically; returns the permutation applied
/// (result[i] is the original position of the i-th sorted coordinate).
std::vector<std::size_t> canonical_order(std::span<const Coord3> coords);

/// Voxel coordinates paired with an N x C feature matrix.
template <typename T>
class SparseTensor {
 public:
  SparseTensor(VoxelSetPtr sites, Matrix<T> features) : sites_(std::move(sites)), features_(std::move(features)) {
    if (!sites_ || sites_->size() != features_.rows()) {
      throw ShapeError("feature rows do not match the number of sites");
    }
  }

  /// Builds the canonical form from coordinates in any order, permuting
  /// feature rows alongside. Throws DuplicateCoord.
  static SparseTensor from_unsorted(std::span<const Coord3> coords, const Matrix<T>& features) {
    if (coords.size() != features.rows()) throw ShapeError("coordinate count does not match feature rows");
    const auto order = canonical_order(coords);
    std::vector<Coord3> sorted(coords.size());
    Matrix<T> permuted(features.rows(), features.cols());
    for (std::size_t i = 0; i < order.size(); ++i) {
      sorted[i] = coords[order[i]];
      std::ranges::copy(features.row(order[i]), permuted.row(i).begin());
    }
    for (std::size_t i = 1; i < sorted.size(); ++i) {
      if (sorted[i] == sorted[i - 1]) throw DuplicateCoord(sorted[i]);
    }
    return SparseTensor(std::make_shared<const VoxelSet>(std::move(sorted)), std::move(permuted));
  }

  std::size_t size() const noexcept { return sites_->size(); }
  std::size_t channels() const noexcept { return features_.cols(); }
  std::span<const Coord3> coords() const noexcept { return sites_->coords(); }
  const VoxelSetPtr& sites() const noexcept { return sites_; }
  const Matrix<T>& features() const noexcept { return features_; }
  Matrix<T>& mutable_features() noexcept { return features_; }

  std::uint32_t find(const Coord3& c) const noexcept { return sites_->find(c); }

  /// Same sites, new features.
  SparseTensor with_features(Matrix<T> features) const { return SparseTensor(sites_, std::move(features)); }

 private:
  VoxelSetPtr sites_;
  Matrix<T> features_;
};

template <typename To, typename From>
SparseTensor<To> tensor_cast(const SparseTensor<From>& t) {
  return SparseTensor<To>(t.sites(), matrix_cast<To>(t.features()));
}

/// Coordinates equal and features equal bit for bit.
template <typename T>
bool bitwise_equal(const SparseTensor<T>& a, const SparseTensor<T>& b) {
  return std::ranges::equal(a.coords(), b.coords()) && bitwise_equal(a.features(), b.features());
}

}  // namespace sparsekern
