// SPDX-License-Identifier: Apache-2.0
#include "sparsekern/erf.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace sparsekern {

double ErfResult::at(const Coord3& c) const {
  const auto it = std::ranges::lower_bound(coords, c);
  return it != coords.end() && *it == c ? values[static_cast<std::size_t>(it - coords.begin())] : 0.0;
}

template <typename T>
ErfResult erf_compute(const Net<T>& net, const SparseTensor<T>& x, const ErfTarget& target) {
  const NetTrace<T> trace = net_trace(net, x);
  const SparseTensor<T>& out = trace.outputs.back();
  const std::uint32_t row = out.find(target.coord);
  if (row == kNoSite) throw TargetNotFound("no output site at " + to_string(target.coord));
  if (target.channel >= out.channels()) {
    throw TargetNotFound("channel " + std::to_string(target.channel) + " outside the " +
                         std::to_string(out.channels()) + " output channels");
  }
  Matrix<T> seed(out.size(), out.channels());
  seed(row, target.channel) = T{1};
  const NetGrads<T> grads = net_backward(net, trace, seed);

  ErfResult erf;
  erf.target = target;
  erf.coords.assign(x.coords().begin(), x.coords().end());
  erf.values.resize(x.size());
  double peak = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double sq = 0.0;
    for (T g : grads.d_input.row(i)) sq += static_cast<double>(g) * static_cast<double>(g);
    erf.values[i] = std::sqrt(sq);
    peak = std::max(peak, erf.values[i]);
  }
  erf.all_zero = !(peak > 0.0);
  if (!erf.all_zero) {
    for (double& v : erf.values) v /= peak;
  }
  return erf;
}

void write_erf_csv(std::ostream& os, const ErfResult& erf) {
  os << "x,y,z,value\n";
  char buf[64];
  for (std::size_t i = 0; i < erf.coords.size(); ++i) {
    const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), erf.values[i]);
    const Coord3& c = erf.coords[i];
    os << c.x << ',' << c.y << ',' << c.z << ',' << std::string_view(buf, static_cast<std::size_t>(end - buf)) << '\n';
  }
}

std::string erf_pgm(const ErfResult& erf, int axis) {
  if (axis < 0 || axis > 2) throw std::invalid_argument("projection axis must be 0, 1 or 2");
  auto component = [](const Coord3& c, int a) { return a == 0 ? c.x : a == 1 ? c.y : c.z; };
  const int col_axis = axis == 0 ? 1 : 0;
  const int row_axis = axis == 2 ? 1 : 2;

  std::int32_t c0 = 0, c1 = 0, r0 = 0, r1 = 0;
  for (std::size_t i = 0; i < erf.coords.size(); ++i) {
    const std::int32_t c = component(erf.coords[i], col_axis), r = component(erf.coords[i], row_axis);
    if (i == 0) {
      c0 = c1 = c;
      r0 = r1 = r;
    }
    c0 = std::min(c0, c), c1 = std::max(c1, c), r0 = std::min(r0, r), r1 = std::max(r1, r);
  }
  const std::size_t width = erf.coords.empty() ? 0 : static_cast<std::size_t>(c1 - c0) + 1;
  const std::size_t height = erf.coords.empty() ? 0 : static_cast<std::size_t>(r1 - r0) + 1;
  std::vector<double> image(width * height, 0.0);
  for (std::size_t i = 0; i < erf.coords.size(); ++i) {
    const auto col = static_cast<std::size_t>(component(erf.coords[i], col_axis) - c0);
    const auto row = static_cast<std::size_t>(component(erf.coords[i], row_axis) - r0);
    double& px = image[row * width + col];
    px = std::max(px, erf.values[i]);
  }

  std::ostringstream os;
  os << "P2\n" << width << ' ' << height << "\n255\n";
  for (std::size_t r = 0; r < height; ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      const double v = image[r * width + c];
      long level = v > 0.0 ? std::max(1L, std::lround(v * 255.0)) : 0L;
      os << (c ? " " : "") << std::min(level, 255L);
    }
    os << '\n';
  }
  return os.str();
}

template ErfResult erf_compute<float>(const Net<float>&, const SparseTensor<float>&, const ErfTarget&);
template ErfResult erf_compute<double>(const Net<double>&, const SparseTensor<double>&, const ErfTarget&);

}  // namespace sparsekern
