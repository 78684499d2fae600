// SPDX-License-Identifier: Apache-2.0
//
// Reference implementations used only by tests. Nothing here touches the
// rulebook or the group map of the engine: occupancy lives in a dense box,
// outputs and pairs are found by exhaustive search, and the weight group of
// an offset is recomputed from the sign of each component.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "sparsekern/coord.hpp"
#include "sparsekern/matrix.hpp"

namespace sparsekern::testing {

/// Features scattered into the bounding box of the active sites; reads
/// outside the box or at inactive cells are zero.
class DenseGrid {
 public:
  DenseGrid(std::span<const Coord3> coords, const Matrix<double>& features) : channels_(features.cols()) {
    lo_ = hi_ = coords.empty() ? Coord3{} : coords.front();
    for (const Coord3& c : coords) {
      lo_ = {std::min(lo_.x, c.x), std::min(lo_.y, c.y), std::min(lo_.z, c.z)};
      hi_ = {std::max(hi_.x, c.x), std::max(hi_.y, c.y), std::max(hi_.z, c.z)};
    }
    nx_ = hi_.x - lo_.x + 1;
    ny_ = hi_.y - lo_.y + 1;
    nz_ = hi_.z - lo_.z + 1;
    active_.assign(static_cast<std::size_t>(nx_) * ny_ * nz_, 0);
    values_.assign(active_.size() * channels_, 0.0);
    for (std::size_t i = 0; i < coords.size(); ++i) {
      const std::size_t cell = linear(coords[i]);
      active_[cell] = 1;
      std::ranges::copy(features.row(i), values_.begin() + static_cast<std::ptrdiff_t>(cell * channels_));
    }
  }

  bool active(const Coord3& p) const { return inside(p) && active_[linear(p)]; }
  const double* at(const Coord3& p) const { return values_.data() + linear(p) * channels_; }
  Coord3 lo() const { return lo_; }
  Coord3 hi() const { return hi_; }

 private:
  bool inside(const Coord3& p) const {
    return p.x >= lo_.x && p.y >= lo_.y && p.z >= lo_.z && p.x <= hi_.x && p.y <= hi_.y && p.z <= hi_.z;
  }
  std::size_t linear(const Coord3& p) const {
    return (static_cast<std::size_t>(p.x - lo_.x) * ny_ + (p.y - lo_.y)) * nz_ + (p.z - lo_.z);
  }

  std::size_t channels_;
  Coord3 lo_, hi_;
  int nx_ = 0, ny_ = 0, nz_ = 0;
  std::vector<char> active_;
  std::vector<double> values_;
};

inline int floor_div(int a, int b) { return a >= 0 ? a / b : -((-a + b - 1) / b); }

/// Every q with stride * q + k active for some offset k, by scanning the box.
inline std::vector<Coord3> brute_force_outputs(std::span<const Coord3> coords, std::span<const Coord3> offsets,
                                               int stride) {
  const DenseGrid grid(coords, Matrix<double>(coords.size(), 1));
  int reach = 0;
  for (const Coord3& k : offsets) reach = std::max({reach, std::abs(k.x), std::abs(k.y), std::abs(k.z)});
  const Coord3 lo = grid.lo(), hi = grid.hi();
  std::vector<Coord3> out;
  for (int x = floor_div(lo.x - reach, stride); x <= floor_div(hi.x + reach, stride) + 1; ++x)
    for (int y = floor_div(lo.y - reach, stride); y <= floor_div(hi.y + reach, stride) + 1; ++y)
      for (int z = floor_div(lo.z - reach, stride); z <= floor_div(hi.z + reach, stride) + 1; ++z) {
        const Coord3 q{x, y, z};
        for (const Coord3& k : offsets) {
          if (grid.active(q * stride + k)) {
            out.push_back(q);
            break;
          }
        }
      }
  return out;  // loop order is lexicographic
}

struct OraclePair {
  std::size_t in, out, offset;
  friend bool operator==(const OraclePair&, const OraclePair&) = default;
  friend auto operator<=>(const OraclePair&, const OraclePair&) = default;
};

/// All (input, output, offset) triples with in == stride * out + offset,
/// found by comparing every combination.
inline std::vector<OraclePair> brute_force_pairs(std::span<const Coord3> in, std::span<const Coord3> out,
                                                 std::span<const Coord3> offsets, int stride) {
  std::vector<OraclePair> pairs;
  for (std::size_t j = 0; j < out.size(); ++j)
    for (std::size_t k = 0; k < offsets.size(); ++k)
      for (std::size_t i = 0; i < in.size(); ++i)
        if (in[i] == out[j] * stride + offsets[k]) pairs.push_back({i, j, k});
  std::ranges::sort(pairs);
  return pairs;
}

/// Weight group of an offset under the per-axis sign partition, as an index
/// into the 3^3 grid ordered lexicographically.
inline int oracle_group(const Coord3& k) {
  auto s = [](int v) { return (v > 0) - (v < 0); };
  return (s(k.x) + 1) * 9 + (s(k.y) + 1) * 3 + (s(k.z) + 1);
}

/// y[q] = sum_k [p active] (X[p] + E[k]) * W_k, p = stride * q + k.
/// `weight(k)` returns a c_in x c_out row-major slice; `embed(k)` a c_in row
/// or nullptr for no embedding.
inline Matrix<double> dense_conv(const DenseGrid& grid, std::span<const Coord3> out_coords,
                                 std::span<const Coord3> offsets, int stride, std::size_t c_in, std::size_t c_out,
                                 const std::function<const double*(std::size_t)>& weight,
                                 const std::function<const double*(std::size_t)>& embed) {
  Matrix<double> y(out_coords.size(), c_out);
  for (std::size_t j = 0; j < out_coords.size(); ++j) {
    for (std::size_t k = 0; k < offsets.size(); ++k) {
      const Coord3 p = out_coords[j] * stride + offsets[k];
      if (!grid.active(p)) continue;
      const double* xv = grid.at(p);
      const double* e = embed ? embed(k) : nullptr;
      const double* w = weight(k);
      for (std::size_t b = 0; b < c_out; ++b) {
        double s = 0.0;
        for (std::size_t a = 0; a < c_in; ++a) s += (xv[a] + (e ? e[a] : 0.0)) * w[a * c_out + b];
        y(j, b) += s;
      }
    }
  }
  return y;
}

/// max |a - b| / max |b|, the normwise relative error in the infinity norm.
inline double max_rel_err(std::span<const double> a, std::span<const double> b) {
  double diff = 0.0, ref = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff = std::max(diff, std::abs(a[i] - b[i]));
    ref = std::max(ref, std::abs(b[i]));
  }
  return ref > 0.0 ? diff / ref : diff;
}

/// ||a - b||_2 / max(||a||_2, ||b||_2); zero when both vanish.
inline double norm_rel_err(std::span<const double> a, std::span<const double> b) {
  double d = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    d += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  const double denom = std::sqrt(std::max(na, nb));
  return denom > 0.0 ? std::sqrt(d) / denom : std::sqrt(d);
}

/// Central differences of `loss` with respect to every entry of `params`
/// (restored after each probe).
inline std::vector<double> central_differences(std::span<double> params, const std::function<double()>& loss,
                                               double step) {
  std::vector<double> grad(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double keep = params[i];
    params[i] = keep + step;
    const double up = loss();
    params[i] = keep - step;
    const double down = loss();
    params[i] = keep;
    grad[i] = (up - down) / (2.0 * step);
  }
  return grad;
}

inline double half_squared_norm(const Matrix<double>& y) {
  double s = 0.0;
  for (double v : y.data()) s += v * v;
  return 0.5 * s;
}

}  // namespace sparsekern::testing
