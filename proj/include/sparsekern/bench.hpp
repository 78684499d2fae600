// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <ostream>
#include <string_view>
#include <vector>

#include "sparsekern/kernel_map.hpp"
#include "sparsekern/scene.hpp"

namespace sparsekern {

enum class ConvMode { plain, swp };

std::string_view mode_name(ConvMode mode);

/// plain: L^3 * c_in * c_out. swp: 27 * c_in * c_out + L^3 * c_in.
/// Throws InvalidKernelSize (swp needs L >= 3).
std::uint64_t param_count(ConvMode mode, int kernel_size, std::uint64_t c_in, std::uint64_t c_out);

/// Weight multiplications of a forward pass, counted in scalar
/// multiply-accumulates: pairs * c_in * c_out for a plain per-offset map,
/// (sum over outputs of non-empty groups) * c_in * c_out for a grouped map.
/// Throws PartitionMismatch when the map kind does not match the mode.
std::uint64_t mac_count(const KernelMap& kmap, ConvMode mode, std::uint64_t c_in, std::uint64_t c_out);
std::uint64_t mac_count(const GroupedKernelMap& gkmap, ConvMode mode, std::uint64_t c_in, std::uint64_t c_out);

/// The latency benchmark workload: 80,000 voxels scattered uniformly over
/// [0, 99]^3 (8% occupancy), 16 channels.
SceneSpec benchmark_scene(std::uint64_t seed);

struct BenchConfig {
  std::vector<int> kernels{3, 5, 7, 9, 11, 13, 15, 17};
  std::vector<ConvMode> modes{ConvMode::plain, ConvMode::swp};
  std::uint32_t c_in = 16;
  std::uint32_t c_out = 16;
  SceneSpec scene = benchmark_scene(0);
  std::uint64_t weight_seed = 0;
  int warmup = 10;
  int repeats = 10;
  /// Time rulebook construction together with the forward pass.
  bool include_map = false;
};

struct BenchRow {
  int kernel = 0;
  ConvMode mode = ConvMode::plain;
  std::uint64_t params = 0;
  std::uint64_t macs = 0;
  std::uint64_t pairs = 0;
  double latency_ms = 0.0;  ///< mean wall clock over timed repeats
};

/// Rows in kernel-major, mode-minor order. Forward passes run in f32; the
/// swp mode times the shrunk path over a grouped map. Throws
/// InfeasibleScene, InvalidKernelSize, std::invalid_argument for repeat
/// counts below 1.
std::vector<BenchRow> bench_run(const BenchConfig& config,
                                const std::function<void(const BenchRow&)>& on_row = {});

inline constexpr std::string_view kBenchCsvHeader = "kernel,mode,params,macs,pairs,latency_ms";

void write_bench_csv_header(std::ostream& os);
void write_bench_csv_row(std::ostream& os, const BenchRow& row);

}  // namespace sparsekern
