// SPDX-License-Identifier: Apache-2.0
//
// Command-line driver: voxelize point clouds, generate scenes and models,
// benchmark layers, compute receptive fields, train a toy network and
// inspect files. Exit status is 0 on success, 2 for usage, validation and
// format errors, 1 for anything else.
#include <CLI11.hpp>

#include <charconv>
#include <cstdio>
#include <cstring>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "sparsekern/bench.hpp"
#include "sparsekern/bytes.hpp"
#include "sparsekern/checkpoint.hpp"
#include "sparsekern/erf.hpp"
#include "sparsekern/net.hpp"
#include "sparsekern/parallel.hpp"
#include "sparsekern/scene.hpp"
#include "sparsekern/spvx.hpp"

namespace sk = sparsekern;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

const CLI::Validator kOddKernel(
    [](std::string& s) -> std::string {
      int v = 0;
      const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      const bool ok = ec == std::errc{} && end == s.data() + s.size() && v >= 1 && v % 2 == 1;
      return ok ? "" : "kernel size must be odd and positive: " + s;
    },
    "ODD");

const std::map<std::string, int> kAxes{{"x", 0}, {"y", 1}, {"z", 2}};

sk::DType parse_dtype(const std::string& s) { return s == "f64" ? sk::DType::f64 : sk::DType::f32; }

// ---------------------------------------------------------------- voxelize

struct VoxelizeArgs {
  std::string input, output;
  std::vector<double> voxel_size{0.05};
  std::vector<double> range{0, 1, 0, 1, 0, 1};
  std::string dtype = "f32";
};

template <typename T>
void write_voxelized(const std::vector<sk::Point>& points, const sk::VoxelGrid& grid, const std::string& path) {
  const auto t = sk::voxelize<T>(points, grid);
  sk::write_file(path, sk::serialize_spvx(t));
  double cells = 1.0;
  for (int a = 0; a < 3; ++a) cells *= static_cast<double>(grid.cells(a));
  std::printf("N=%zu\nC=%zu\noccupancy=%.6g\n", t.size(), t.channels(), static_cast<double>(t.size()) / cells);
}

void run_voxelize(const VoxelizeArgs& a) {
  if (a.voxel_size.size() != 1 && a.voxel_size.size() != 3) throw UsageError("--voxel-size takes 1 or 3 values");
  sk::VoxelGrid grid;
  for (int i = 0; i < 3; ++i) {
    grid.voxel_size[i] = a.voxel_size.size() == 1 ? a.voxel_size[0] : a.voxel_size[i];
    grid.range[i] = {a.range[2 * i], a.range[2 * i + 1]};
    if (!(grid.range[i][1] > grid.range[i][0])) throw UsageError("--range needs min < max on every axis");
  }
  std::ifstream in(a.input);
  const auto points = sk::read_point_csv(in);
  if (parse_dtype(a.dtype) == sk::DType::f64) write_voxelized<double>(points, grid, a.output);
  else write_voxelized<float>(points, grid, a.output);
}

// ------------------------------------------------------------------- scene

struct SceneArgs {
  std::string output;
  std::uint64_t voxels = 1000;
  std::vector<int> extent{0, 15};
  std::uint32_t channels = 1;
  std::uint64_t seed = 0;
  std::string dtype = "f32";
  std::vector<int> line;
};

void run_scene(const SceneArgs& a) {
  std::vector<std::byte> bytes;
  if (!a.line.empty()) {
    std::vector<sk::Coord3> coords;
    for (int x : a.line) coords.push_back({x, 0, 0});
    sk::SplitMix64 rng(a.seed);
    sk::Matrix<double> f(coords.size(), a.channels);
    for (double& v : f.data()) v = rng.uniform(-1.0, 1.0);
    const auto t = sk::SparseTensor<double>::from_unsorted(coords, f);
    bytes = parse_dtype(a.dtype) == sk::DType::f64 ? sk::serialize_spvx(t) : sk::serialize_spvx(sk::tensor_cast<float>(t));
  } else {
    if (a.extent.size() != 2 && a.extent.size() != 6) throw UsageError("--extent takes lo,hi or six values");
    sk::SceneSpec spec{a.voxels, {}, a.channels, a.seed};
    for (int i = 0; i < 3; ++i) {
      const std::size_t o = a.extent.size() == 2 ? 0 : 2 * static_cast<std::size_t>(i);
      spec.extent[i] = {a.extent[o], a.extent[o + 1]};
    }
    bytes = parse_dtype(a.dtype) == sk::DType::f64 ? sk::serialize_spvx(sk::random_scene<double>(spec))
                                                    : sk::serialize_spvx(sk::random_scene<float>(spec));
  }
  sk::write_file(a.output, bytes);
  const auto h = sk::read_spvx_header(bytes);
  std::printf("N=%u\nC=%u\n", h.n, h.channels);
}

// -------------------------------------------------------------- init-model

struct InitModelArgs {
  std::string output;
  std::string mode = "plain";
  std::vector<int> kernels{3};
  std::uint32_t channels = 1;
  std::uint64_t seed = 0;
  std::string dtype = "f64";
};

template <typename T>
std::vector<std::byte> init_model(const InitModelArgs& a) {
  sk::SplitMix64 rng(a.seed);
  std::vector<sk::AnyLayer<T>> layers;
  for (int L : a.kernels) {
    if (a.mode == "swp") layers.emplace_back(sk::init_swp_layer<T>(L, a.channels, a.channels, rng));
    else layers.emplace_back(sk::init_plain_layer<T>(sk::enumerate_offsets(L), a.channels, a.channels, rng));
  }
  return sk::serialize_layers<T>(layers);
}

void run_init_model(const InitModelArgs& a) {
  if (a.mode == "swp") {
    for (int L : a.kernels)
      if (L < 3) throw UsageError("swp layers need kernel size 3 or more");
  }
  const auto bytes = parse_dtype(a.dtype) == sk::DType::f64 ? init_model<double>(a) : init_model<float>(a);
  sk::write_file(a.output, bytes);
  std::printf("layers=%zu\nbytes=%zu\n", a.kernels.size(), bytes.size());
}

// ------------------------------------------------------------------- bench

struct BenchArgs {
  std::vector<int> kernels{3, 5, 7, 9, 11, 13, 15, 17};
  std::vector<std::string> modes{"plain", "swp"};
  std::uint64_t voxels = 80000;
  std::vector<int> extent{0, 99};
  std::uint32_t channels = 16;
  std::uint64_t seed = 0;
  int repeats = 10;
  int warmup = 10;
  bool include_map = false;
};

void run_bench(const BenchArgs& a) {
  sk::BenchConfig cfg;
  cfg.kernels = a.kernels;
  cfg.modes.clear();
  for (const auto& m : a.modes) cfg.modes.push_back(m == "swp" ? sk::ConvMode::swp : sk::ConvMode::plain);
  for (int L : cfg.kernels) {
    for (sk::ConvMode m : cfg.modes)
      if (m == sk::ConvMode::swp && L < 3) throw UsageError("swp mode needs kernel size 3 or more");
  }
  if (a.extent.size() != 2) throw UsageError("--extent takes lo,hi");
  cfg.scene = sk::SceneSpec::cube(a.voxels, a.extent[0], a.extent[1], a.channels, a.seed);
  cfg.c_in = cfg.c_out = a.channels;
  cfg.weight_seed = a.seed;
  cfg.repeats = a.repeats;
  cfg.warmup = a.warmup;
  cfg.include_map = a.include_map;
  sk::write_bench_csv_header(std::cout);
  sk::bench_run(cfg, [](const sk::BenchRow& row) {
    sk::write_bench_csv_row(std::cout, row);
    std::cout.flush();
  });
}

// --------------------------------------------------------------------- erf

struct ErfArgs {
  std::string model, scene, prefix;
  std::vector<int> target;
  std::string axis = "z";
  bool relu = false;
};

void run_erf(const ErfArgs& a) {
  auto layers = sk::deserialize_layers<double>(sk::read_file(a.model));
  const auto x = sk::deserialize_spvx<double>(sk::read_file(a.scene));
  const auto net = sk::net_from_layers<double>(std::move(layers), a.relu);
  net.validate(x.channels());
  if (a.target[3] < 0) throw UsageError("--target channel must be nonnegative");
  const sk::ErfTarget target{{a.target[0], a.target[1], a.target[2]}, static_cast<std::size_t>(a.target[3])};
  const sk::ErfResult erf = sk::erf_compute(net, x, target);
  {
    std::ofstream csv(a.prefix + ".csv");
    sk::write_erf_csv(csv, erf);
  }
  {
    std::ofstream pgm(a.prefix + ".pgm");
    pgm << sk::erf_pgm(erf, kAxes.at(a.axis));
  }
  std::size_t support = 0;
  for (double v : erf.values) support += v > 0.0;
  std::printf("voxels=%zu\nsupport=%zu\nall_zero=%d\n", erf.values.size(), support, erf.all_zero ? 1 : 0);
}

// --------------------------------------------------------------- train-toy

struct TrainArgs {
  int steps = 100;
  double lr = 0.1;
  std::string variant = "swp";
  int kernel = 5;
  std::uint64_t voxels = 200;
  std::vector<int> extent{0, 7};
  std::uint32_t channels = 4;
  std::uint64_t seed = 0;
};

void run_train(const TrainArgs& a) {
  if (a.extent.size() != 2) throw UsageError("--extent takes lo,hi");
  if (a.variant == "swp" && a.kernel < 3) throw UsageError("swp variant needs kernel size 3 or more");
  const auto x = sk::random_scene<double>(sk::SceneSpec::cube(a.voxels, a.extent[0], a.extent[1], a.channels, a.seed));
  std::vector<int> labels(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) labels[i] = x.features()(i, 0) > 0.0 ? 1 : 0;
  auto net = sk::make_desk_net<double>(a.variant == "plain" ? sk::DeskVariant::plain : sk::DeskVariant::swp,
                                       a.channels, a.seed, a.kernel, 2);
  std::printf("step,loss\n");
  for (int s = 0; s < a.steps; ++s) {
    auto step = sk::train_step(net, x, labels, a.lr);
    std::printf("%d,%.17g\n", s, step.loss);
    net = std::move(step.net);
  }
  std::printf("%d,%.17g\n", a.steps, sk::evaluate_loss(net, x, labels));
}

// ----------------------------------------------------------------- inspect

struct InspectArgs {
  std::string path;
};

void inspect_spvx(std::span<const std::byte> bytes) {
  const auto h = sk::read_spvx_header(bytes);
  std::printf("format=SPVX\nversion=%u\nN=%u\nC=%u\ndtype=%s\n", h.version, h.n, h.channels,
              std::string(sk::dtype_name(h.dtype)).c_str());
  // Full decode enforces canonical order, uniqueness and exact length.
  const auto t = sk::deserialize_spvx<double>(bytes);
  bool index_ok = t.sites()->index().size() == t.size();
  for (std::size_t i = 0; i < t.size() && index_ok; ++i) index_ok = t.find(t.coords()[i]) == i;
  std::printf("canonical=ok\nindex=%s\n", index_ok ? "ok" : "FAILED");
  if (!index_ok) throw std::logic_error("index invariant violated");
}

void inspect_spwt(std::span<const std::byte> bytes) {
  const auto headers = sk::read_spwt_headers(bytes);
  std::printf("format=SPWT\nlayers=%zu\n", headers.size());
  std::uint64_t params = 0;
  for (std::size_t i = 0; i < headers.size(); ++i) {
    const auto& h = headers[i];
    const auto mode = h.group_grid == 3 ? sk::ConvMode::swp : sk::ConvMode::plain;
    const auto n = sk::param_count(mode, static_cast<int>(h.kernel_size), h.c_in, h.c_out);
    params += n;
    std::printf("layer%zu: kind=%s L=%u G=%u c_in=%u c_out=%u dtype=%s params=%llu\n", i,
                std::string(sk::mode_name(mode)).c_str(), h.kernel_size, h.group_grid, h.c_in, h.c_out,
                std::string(sk::dtype_name(h.dtype)).c_str(), static_cast<unsigned long long>(n));
  }
  const auto layers = sk::deserialize_layers<double>(bytes);
  bool chain_ok = true;
  for (std::size_t i = 1; i < headers.size(); ++i) chain_ok &= headers[i].c_in == headers[i - 1].c_out;
  for (const auto& l : layers) std::visit([](const auto& layer) { layer.validate(); }, l);
  std::printf("params=%llu\nchannel_chain=%s\n", static_cast<unsigned long long>(params), chain_ok ? "ok" : "broken");
}

void run_inspect(const InspectArgs& a) {
  const auto bytes = sk::read_file(a.path);
  auto starts_with = [&](std::string_view magic) {
    return bytes.size() >= magic.size() && std::memcmp(bytes.data(), magic.data(), magic.size()) == 0;
  };
  if (starts_with(sk::kSpvxMagic)) inspect_spvx(bytes);
  else if (starts_with(sk::kSpwtMagic)) inspect_spwt(bytes);
  else throw sk::FormatError("unrecognized magic", 0);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse voxel convolution toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  unsigned threads = 0;
  app.add_option("--threads", threads, "Worker thread cap (default: SPARSEKERN_THREADS, else all cores)")
      ->check(CLI::PositiveNumber);

  VoxelizeArgs vox;
  auto* voxelize = app.add_subcommand("voxelize", "Voxelize a point-cloud CSV (x,y,z,f1..fC with header) into SPVX");
  voxelize->add_option("input", vox.input, "Point CSV")->required()->check(CLI::ExistingFile);
  voxelize->add_option("output", vox.output, "SPVX output")->required();
  voxelize->add_option("--voxel-size", vox.voxel_size, "Cell size, one value or one per axis")
      ->delimiter(',')
      ->check(CLI::PositiveNumber);
  voxelize->add_option("--range", vox.range, "xmin,xmax,ymin,ymax,zmin,zmax (half-open)")
      ->delimiter(',')
      ->expected(6);
  voxelize->add_option("--dtype", vox.dtype, "Feature type")->check(CLI::IsMember({"f32", "f64"}));

  SceneArgs sc;
  auto* scene = app.add_subcommand("scene", "Write a random scene, or a line of voxels along x, as SPVX");
  scene->add_option("output", sc.output, "SPVX output")->required();
  scene->add_option("--voxels", sc.voxels, "Voxel count")->check(CLI::PositiveNumber);
  scene->add_option("--extent", sc.extent, "lo,hi for a cube or six per-axis bounds")->delimiter(',');
  scene->add_option("--channels", sc.channels, "Feature channels")->check(CLI::PositiveNumber);
  scene->add_option("--seed", sc.seed, "Random seed");
  scene->add_option("--dtype", sc.dtype, "Feature type")->check(CLI::IsMember({"f32", "f64"}));
  scene->add_option("--line", sc.line, "x positions of a line scene (y = z = 0)")->delimiter(',');

  InitModelArgs im;
  auto* init = app.add_subcommand("init-model", "Write a stack of randomly initialized layers as SPWT");
  init->add_option("output", im.output, "SPWT output")->required();
  init->add_option("--mode", im.mode, "Layer kind")->check(CLI::IsMember({"plain", "swp"}));
  init->add_option("--kernels", im.kernels, "Kernel size per layer")->delimiter(',')->check(kOddKernel);
  init->add_option("--channels", im.channels, "Channels of every layer")->check(CLI::PositiveNumber);
  init->add_option("--seed", im.seed, "Random seed");
  init->add_option("--dtype", im.dtype, "Weight type")->check(CLI::IsMember({"f32", "f64"}));

  BenchArgs ba;
  auto* bench = app.add_subcommand(
      "bench", "Parameter, multiplication and latency table; timings exclude rulebook construction unless "
               "--include-map is given");
  bench->add_option("--kernels", ba.kernels, "Kernel sizes")->delimiter(',')->check(kOddKernel);
  bench->add_option("--mode", ba.modes, "Modes")->delimiter(',')->check(CLI::IsMember({"plain", "swp"}));
  bench->add_option("--voxels", ba.voxels, "Active voxels")->check(CLI::PositiveNumber);
  bench->add_option("--extent", ba.extent, "Cube bounds lo,hi")->delimiter(',');
  bench->add_option("--channels", ba.channels, "Input and output channels")->check(CLI::PositiveNumber);
  bench->add_option("--seed", ba.seed, "Scene and weight seed");
  bench->add_option("--repeats", ba.repeats, "Timed runs")->check(CLI::PositiveNumber);
  bench->add_option("--warmup", ba.warmup, "Untimed runs")->check(CLI::PositiveNumber);
  bench->add_flag("--include-map", ba.include_map, "Time rulebook construction too");

  ErfArgs ea;
  auto* erf = app.add_subcommand("erf", "Effective receptive field of one output feature (CSV + PGM)");
  erf->add_option("model", ea.model, "SPWT model")->required()->check(CLI::ExistingFile);
  erf->add_option("scene", ea.scene, "SPVX scene")->required()->check(CLI::ExistingFile);
  erf->add_option("prefix", ea.prefix, "Output prefix for .csv and .pgm")->required();
  erf->add_option("--target", ea.target, "x,y,z,channel")->delimiter(',')->expected(4)->required();
  erf->add_option("--axis", ea.axis, "Projection axis")->check(CLI::IsMember({"x", "y", "z"}));
  erf->add_flag("--relu", ea.relu, "Rectifier between layers");

  TrainArgs ta;
  auto* train = app.add_subcommand("train-toy", "Train the desk-scale net on a synthetic scene; prints step,loss");
  train->add_option("--steps", ta.steps, "Gradient steps")->check(CLI::NonNegativeNumber);
  train->add_option("--lr", ta.lr, "Learning rate")->check(CLI::NonNegativeNumber);
  train->add_option("--variant", ta.variant, "Network variant")->check(CLI::IsMember({"plain", "swp"}));
  train->add_option("--kernel", ta.kernel, "Partition kernel size")->check(kOddKernel);
  train->add_option("--voxels", ta.voxels, "Active voxels")->check(CLI::PositiveNumber);
  train->add_option("--extent", ta.extent, "Cube bounds lo,hi")->delimiter(',');
  train->add_option("--channels", ta.channels, "Input channels")->check(CLI::PositiveNumber);
  train->add_option("--seed", ta.seed, "Scene and weight seed");

  InspectArgs ia;
  auto* inspect = app.add_subcommand("inspect", "Print SPVX or SPWT headers and check invariants");
  inspect->add_option("path", ia.path, "File")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (threads) sk::set_thread_limit(threads);
    if (*voxelize) run_voxelize(vox);
    else if (*scene) run_scene(sc);
    else if (*init) run_init_model(im);
    else if (*bench) run_bench(ba);
    else if (*erf) run_erf(ea);
    else if (*train) run_train(ta);
    else if (*inspect) run_inspect(ia);
    return 0;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const sk::Error& e) {
    std::cerr << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 1;
  }
}
