// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <ostream>
#include <string>
#include <vector>

#include "sparsekern/net.hpp"

namespace sparsekern {

struct ErfTarget {
  Coord3 coord;
  std::size_t channel = 0;
};

/// Effective receptive field of one output feature: for each input voxel,
/// the Euclidean norm over channels of d(output)/d(input), divided by the
/// largest such norm. When every gradient is zero the map stays all-zero
/// and `all_zero` is set.
struct ErfResult {
  std::vector<Coord3> coords;  ///< input sites, canonical order
  std::vector<double> values;  ///< in [0, 1]
  ErfTarget target;
  bool all_zero = false;

  double at(const Coord3& c) const;  ///< 0 for sites not in `coords`
};

/// Throws TargetNotFound if the coordinate is not an output site of the last
/// block or the channel is out of range.
template <typename T>
ErfResult erf_compute(const Net<T>& net, const SparseTensor<T>& x, const ErfTarget& target);

/// "x,y,z,value" header, then one line per input voxel.
void write_erf_csv(std::ostream& os, const ErfResult& erf);

/// Plain PGM (P2) max-projection along `axis` (0 = x, 1 = y, 2 = z) over
/// the bounding box of the input sites. Remaining axes map to (column, row)
/// in increasing order: z -> (x, y), y -> (x, z), x -> (y, z). Intensity is
/// round(255 * value), raised to 1 for any non-zero value so that zero
/// pixels mean exactly zero influence.
std::string erf_pgm(const ErfResult& erf, int axis);

}  // namespace sparsekern
