// SPDX-License-Identifier: Apache-2.0
#include "sparsekern/bench.hpp"

#include <chrono>
#include <cstdio>
#include <optional>
#include <stdexcept>

#include "sparsekern/conv.hpp"

namespace sparsekern {

std::string_view mode_name(ConvMode mode) { return mode == ConvMode::plain ? "plain" : "swp"; }

std::uint64_t param_count(ConvMode mode, int kernel_size, std::uint64_t c_in, std::uint64_t c_out) {
  if (kernel_size < (mode == ConvMode::swp ? 3 : 1) || kernel_size % 2 == 0) {
    throw InvalidKernelSize("kernel size " + std::to_string(kernel_size) + " is not valid for mode " +
                            std::string(mode_name(mode)));
  }
  const std::uint64_t volume = std::uint64_t(kernel_size) * kernel_size * kernel_size;
  if (mode == ConvMode::plain) return volume * c_in * c_out;
  return GroupMap::kGroups * c_in * c_out + volume * c_in;
}

std::uint64_t mac_count(const KernelMap& kmap, ConvMode mode, std::uint64_t c_in, std::uint64_t c_out) {
  if (mode != ConvMode::plain) throw PartitionMismatch("swp multiplications are counted on a grouped kernel map");
  return kmap.total_pairs() * c_in * c_out;
}

std::uint64_t mac_count(const GroupedKernelMap& gkmap, ConvMode mode, std::uint64_t c_in, std::uint64_t c_out) {
  if (mode != ConvMode::swp) throw PartitionMismatch("plain multiplications are counted on a per-offset kernel map");
  return gkmap.nonempty_group_slots() * c_in * c_out;
}

SceneSpec benchmark_scene(std::uint64_t seed) { return SceneSpec::cube(80000, 0, 99, 16, seed); }

namespace {

using Clock = std::chrono::steady_clock;

template <typename Fn>
double mean_latency_ms(int warmup, int repeats, Fn&& run) {
  for (int i = 0; i < warmup; ++i) run();
  const auto start = Clock::now();
  for (int i = 0; i < repeats; ++i) run();
  const std::chrono::duration<double, std::milli> elapsed = Clock::now() - start;
  return elapsed.count() / repeats;
}

}  // namespace

std::vector<BenchRow> bench_run(const BenchConfig& config, const std::function<void(const BenchRow&)>& on_row) {
  if (config.warmup < 1 || config.repeats < 1) throw std::invalid_argument("warmup and repeats must be at least 1");
  for (int L : config.kernels) {
    for (ConvMode mode : config.modes) param_count(mode, L, config.c_in, config.c_out);
  }
  SceneSpec spec = config.scene;
  spec.channels = config.c_in;
  const SparseTensor<float> x = random_scene<float>(spec);

  std::vector<BenchRow> rows;
  for (int L : config.kernels) {
    const OffsetPattern pattern = enumerate_offsets(L);
    std::optional<KernelMap> kmap;
    for (ConvMode mode : config.modes) {
      if (!kmap) kmap = build_kernel_map_submanifold(x, pattern);
      SplitMix64 rng(config.weight_seed ^ (std::uint64_t(L) << 32) ^ std::uint64_t(mode));
      BenchRow row;
      row.kernel = L;
      row.mode = mode;
      row.params = param_count(mode, L, config.c_in, config.c_out);
      row.pairs = kmap->total_pairs();
      if (mode == ConvMode::plain) {
        const auto layer = init_plain_layer<float>(pattern, config.c_in, config.c_out, rng);
        row.macs = mac_count(*kmap, mode, config.c_in, config.c_out);
        row.latency_ms = mean_latency_ms(config.warmup, config.repeats, [&] {
          if (config.include_map) {
            const KernelMap fresh = build_kernel_map_submanifold(x, pattern);
            return conv_forward_plain(x, layer, fresh);
          }
          return conv_forward_plain(x, layer, *kmap);
        });
      } else {
        const auto layer = init_swp_layer<float>(L, config.c_in, config.c_out, rng);
        const GroupedKernelMap grouped = group_kernel_map(*kmap, layer.gmap);
        row.macs = mac_count(grouped, mode, config.c_in, config.c_out);
        row.latency_ms = mean_latency_ms(config.warmup, config.repeats, [&] {
          if (config.include_map) {
            const GroupedKernelMap fresh = group_kernel_map(build_kernel_map_submanifold(x, pattern), layer.gmap);
            return swp_forward_shrunk(x, layer, fresh);
          }
          return swp_forward_shrunk(x, layer, grouped);
        });
      }
      if (on_row) on_row(row);
      rows.push_back(row);
    }
  }
  return rows;
}

void write_bench_csv_header(std::ostream& os) { os << kBenchCsvHeader << '\n'; }

void write_bench_csv_row(std::ostream& os, const BenchRow& row) {
  char latency[32];
  std::snprintf(latency, sizeof(latency), "%.3f", row.latency_ms);
  os << row.kernel << ',' << mode_name(row.mode) << ',' << row.params << ',' << row.macs << ',' << row.pairs << ','
     << latency << '\n';
}

}  // namespace sparsekern
