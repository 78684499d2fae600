// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "harness.hpp"
#include "sparsekern/parallel.hpp"

using namespace sparsekern;
using namespace sparsekern::testing;

namespace {

SparseTensor<double> tensor(std::vector<Coord3> coords, std::vector<double> values, std::size_t channels) {
  Matrix<double> f(coords.size(), channels);
  std::ranges::copy(values, f.data().begin());
  return SparseTensor<double>::from_unsorted(coords, f);
}

std::vector<double> concat(std::initializer_list<std::span<const double>> parts) {
  std::vector<double> out;
  for (auto p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

}  // namespace

TEST_CASE("plain forward: single voxel and zero weights") {
  const auto x = tensor({{0, 0, 0}}, {2.0}, 1);
  PlainConvLayer<double> layer(enumerate_offsets(3), 1, 1);
  layer.slice(layer.pattern.index_of({0, 0, 0}))[0] = 0.5;
  for (std::size_t k = 0; k < 27; ++k)
    if (layer.pattern.offsets[k] != Coord3{0, 0, 0}) layer.slice(k)[0] = 100.0;
  const auto kmap = build_kernel_map_submanifold(x, layer.pattern);
  const auto y = conv_forward_plain(x, layer, kmap);
  CHECK(y(0, 0) == 1.0);

  SplitMix64 rng(1);
  const auto scene = random_scene<double>(SceneSpec::cube(50, 0, 4, 3, 2));
  const PlainConvLayer<double> zero(enumerate_offsets(3), 3, 4);
  const auto yz = conv_forward_plain(scene, zero, build_kernel_map_submanifold(scene, zero.pattern));
  for (double v : yz.data()) CHECK(v == 0.0);
}

TEST_CASE("plain forward matches dense oracle on the three-site line") {
  const auto x = tensor({{0, 0, 0}, {1, 0, 0}, {3, 0, 0}}, {0.3, -1.2, 0.7, 0.1, 2.0, -0.4}, 2);
  SplitMix64 rng(5);
  const auto layer = init_plain_layer<double>(enumerate_offsets(3), 2, 3, rng);
  const auto kmap = build_kernel_map_submanifold(x, layer.pattern);
  const auto y = conv_forward_plain(x, layer, kmap);
  CHECK(max_rel_err(y, oracle_plain(x, layer, x.coords(), 1)) <= 1e-12);
}

TEST_CASE("plain forward matches dense oracle: dilated and strided maps") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Instance inst = random_instance(seed, 200, 10, 4);
    SplitMix64 rng(seed);
    const OffsetPattern pattern = seed % 2 ? enumerate_dilated(3, 2) : enumerate_offsets(inst.kernel_size);
    const auto layer = init_plain_layer<double>(pattern, inst.x.channels(), inst.c_out, rng);
    for (int stride : {1, 2}) {
      const auto kmap = stride == 1 ? build_kernel_map_submanifold(inst.x, pattern)
                                    : build_kernel_map_regular(inst.x, pattern, stride);
      const auto y = conv_forward_plain(inst.x, layer, kmap);
      CHECK(max_rel_err(y, oracle_plain(inst.x, layer, kmap.outputs->coords(), stride)) <= 1e-12);
    }
  }
}

TEST_CASE("swp forward: zero embedding equals tiled plain weights") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Instance inst = random_instance(seed, 300, 12, 5);
    SplitMix64 rng(seed + 100);
    const auto layer = init_swp_layer<double>(inst.kernel_size, inst.x.channels(), inst.c_out, rng);
    const auto kmap = build_kernel_map_submanifold(inst.x, layer.pattern);
    const auto y = swp_forward_train(inst.x, layer, kmap);
    const auto tiled = layer.tiled();
    for (std::size_t k = 0; k < tiled.pattern.size(); ++k) {
      const auto g = static_cast<std::size_t>(oracle_group(tiled.pattern.offsets[k]));
      CHECK(std::ranges::equal(tiled.slice(k), layer.group_slice(g)));
    }
    CHECK(max_rel_err(y, conv_forward_plain(inst.x, tiled, kmap)) <= 1e-12);
  }
}

TEST_CASE("swp forward: single voxel sees only the centre offset") {
  const auto x = tensor({{2, 2, 2}}, {0.5, -0.25}, 2);
  SplitMix64 rng(3);
  auto layer = init_swp_layer<double>(5, 2, 3, rng);
  randomize_embedding(layer, rng);
  const auto kmap = build_kernel_map_submanifold(x, layer.pattern);
  const auto y = swp_forward_train(x, layer, kmap);
  const auto e = layer.embed(static_cast<std::size_t>(layer.pattern.index_of({0, 0, 0})));
  const auto w = layer.group_slice(GroupMap::kCenter);
  for (std::size_t b = 0; b < 3; ++b) {
    const double expected = (0.5 + e[0]) * w[b] + (-0.25 + e[1]) * w[3 + b];
    CHECK(y(0, b) == doctest::Approx(expected).epsilon(1e-14));
  }
  ConvStats stats;
  const auto ys = swp_forward_shrunk(x, layer, group_kernel_map(kmap, layer.gmap), &stats);
  CHECK(stats.products == 1);
  CHECK(bitwise_equal(y, ys));
}

TEST_CASE("swp forward matches dense oracle: two voxels, L = 5") {
  const auto x = tensor({{0, 0, 0}, {2, -1, 1}}, {0.8, -0.6}, 1);
  SplitMix64 rng(11);
  auto layer = init_swp_layer<double>(5, 1, 1, rng);
  randomize_embedding(layer, rng);
  const auto kmap = build_kernel_map_submanifold(x, layer.pattern);
  const auto y = swp_forward_train(x, layer, kmap);
  CHECK(max_rel_err(y, oracle_swp(x, layer, x.coords(), 1)) <= 1e-12);
  CHECK(bitwise_equal(y, swp_forward_shrunk(x, layer, group_kernel_map(kmap, layer.gmap))));
}

TEST_CASE("swp forward matches dense oracle and the shrunk path") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const Instance inst = random_instance(seed);
    SplitMix64 rng(seed + 7);
    auto layer = init_swp_layer<double>(inst.kernel_size, inst.x.channels(), inst.c_out, rng);
    randomize_embedding(layer, rng);
    for (int stride : {1, 2}) {
      const auto kmap = stride == 1 ? build_kernel_map_submanifold(inst.x, layer.pattern)
                                    : build_kernel_map_regular(inst.x, layer.pattern, stride);
      const auto y = swp_forward_train(inst.x, layer, kmap);
      CHECK(max_rel_err(y, oracle_swp(inst.x, layer, kmap.outputs->coords(), stride)) <= 1e-12);
      CHECK(bitwise_equal(y, swp_forward_shrunk(inst.x, layer, group_kernel_map(kmap, layer.gmap))));
    }
  }
}

TEST_CASE("multiplication counts on a dense cube") {
  std::vector<Coord3> cube;
  for (int x = 0; x < 9; ++x)
    for (int y = 0; y < 9; ++y)
      for (int z = 0; z < 9; ++z) cube.push_back({x, y, z});
  const auto x = SparseTensor<double>::from_unsorted(cube, Matrix<double>(cube.size(), 1, 1.0));
  SplitMix64 rng(2);
  const auto swp = init_swp_layer<double>(7, 1, 1, rng);
  const auto plain = init_plain_layer<double>(enumerate_offsets(7), 1, 1, rng);
  const auto kmap = build_kernel_map_submanifold(x, swp.pattern);
  const auto gkmap = group_kernel_map(kmap, swp.gmap);
  ConvStats ps{true}, ss{true};
  conv_forward_plain(x, plain, kmap, &ps);
  swp_forward_shrunk(x, swp, gkmap, &ss);
  const std::uint32_t center = x.find({4, 4, 4});
  CHECK(ps.per_output[center] == 343);
  CHECK(ss.per_output[center] == 27);
  for (std::size_t j = 0; j < x.size(); ++j) {
    CHECK(ss.per_output[j] <= 27);
    CHECK(ss.per_output[j] <= ps.per_output[j]);
  }
  CHECK(ps.products == kmap.total_pairs());
  CHECK(ss.products == gkmap.nonempty_group_slots());
}

TEST_CASE("forward passes are linear without embedding") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Instance inst = random_instance(seed, 200, 10, 4);
    SplitMix64 rng(seed + 31);
    const auto x2 = inst.x.with_features(random_matrix(inst.x.size(), inst.x.channels(), rng));
    const double a = rng.uniform(-2, 2), b = rng.uniform(-2, 2);
    Matrix<double> mix(inst.x.size(), inst.x.channels());
    for (std::size_t i = 0; i < mix.data().size(); ++i)
      mix.data()[i] = a * inst.x.features().data()[i] + b * x2.features().data()[i];
    const auto xm = inst.x.with_features(mix);

    const auto swp = init_swp_layer<double>(inst.kernel_size, inst.x.channels(), inst.c_out, rng);
    const auto kmap = build_kernel_map_submanifold(inst.x, swp.pattern);
    const auto plain = init_plain_layer<double>(swp.pattern, inst.x.channels(), inst.c_out, rng);
    auto check = [&](auto&& f) {
      const auto y1 = f(inst.x), y2 = f(x2), ym = f(xm);
      Matrix<double> combo(y1.rows(), y1.cols());
      for (std::size_t i = 0; i < combo.data().size(); ++i) combo.data()[i] = a * y1.data()[i] + b * y2.data()[i];
      CHECK(max_rel_err(ym, combo) <= 1e-12);
    };
    check([&](const SparseTensor<double>& t) { return swp_forward_train(t, swp, kmap); });
    check([&](const SparseTensor<double>& t) { return conv_forward_plain(t, plain, kmap); });
  }
}

TEST_CASE("results do not depend on the thread count") {
  const auto x = random_scene<double>(SceneSpec::cube(2000, 0, 19, 4, 8));
  SplitMix64 rng(4);
  auto swp = init_swp_layer<double>(5, 4, 4, rng);
  randomize_embedding(swp, rng);
  const auto plain = init_plain_layer<double>(swp.pattern, 4, 4, rng);
  const auto kmap = build_kernel_map_submanifold(x, swp.pattern);
  const auto gkmap = group_kernel_map(kmap, swp.gmap);
  const auto dy = random_matrix(x.size(), 4, rng);
  auto run = [&] {
    return std::tuple(conv_forward_plain(x, plain, kmap), swp_forward_train(x, swp, kmap),
                      swp_forward_shrunk(x, swp, gkmap), swp_backward(x, swp, kmap, dy).d_input);
  };
  set_thread_limit(1);
  const auto one = run();
  set_thread_limit(3);
  const auto three = run();
  set_thread_limit(0);
  CHECK(bitwise_equal(std::get<0>(one), std::get<0>(three)));
  CHECK(bitwise_equal(std::get<1>(one), std::get<1>(three)));
  CHECK(bitwise_equal(std::get<2>(one), std::get<2>(three)));
  CHECK(bitwise_equal(std::get<3>(one), std::get<3>(three)));
}

TEST_CASE("plain backward: trivial cases") {
  const auto x = tensor({{0, 0, 0}}, {2.0}, 1);
  PlainConvLayer<double> layer(enumerate_offsets(3), 1, 1);
  const std::size_t zero = static_cast<std::size_t>(layer.pattern.index_of({0, 0, 0}));
  layer.slice(zero)[0] = 0.5;
  const auto kmap = build_kernel_map_submanifold(x, layer.pattern);
  const auto g = conv_backward_plain(x, layer, kmap, Matrix<double>(1, 1, 3.0));
  CHECK(g.d_weights[zero] == 6.0);
  CHECK(g.d_input(0, 0) == 1.5);
  for (std::size_t k = 0; k < 27; ++k)
    if (k != zero) CHECK(g.d_weights[k] == 0.0);
  CHECK(g.d_embedding.empty());

  const auto scene = random_scene<double>(SceneSpec::cube(40, 0, 4, 2, 3));
  SplitMix64 rng(9);
  const auto l2 = init_plain_layer<double>(enumerate_offsets(3), 2, 2, rng);
  const auto g0 = conv_backward_plain(scene, l2, build_kernel_map_submanifold(scene, l2.pattern),
                                      Matrix<double>(scene.size(), 2));
  for (double v : g0.d_weights) CHECK(v == 0.0);
  for (double v : g0.d_input.data()) CHECK(v == 0.0);
}

TEST_CASE("plain backward matches finite differences") {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const Instance inst = random_instance(seed, 25, 5, 3);
    SplitMix64 rng(seed + 50);
    auto layer = init_plain_layer<double>(enumerate_offsets(3), inst.x.channels(), inst.c_out, rng);
    auto x = inst.x;
    const auto kmap = build_kernel_map_submanifold(x, layer.pattern);
    const auto y = conv_forward_plain(x, layer, kmap);
    const auto g = conv_backward_plain(x, layer, kmap, y);
    auto loss = [&] { return half_squared_norm(conv_forward_plain(x, layer, kmap)); };
    const auto fd_w = central_differences(layer.weights, loss, 1e-5);
    const auto fd_x = central_differences(x.mutable_features().data(), loss, 1e-5);
    CHECK(norm_rel_err(concat({g.d_weights, g.d_input.data()}), concat({fd_w, fd_x})) <= 1e-6);
  }
}

TEST_CASE("swp backward matches finite differences on W, E and X") {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const Instance inst = random_instance(seed, 20, 5, 3);
    SplitMix64 rng(seed + 70);
    auto layer = init_swp_layer<double>(inst.kernel_size, inst.x.channels(), inst.c_out, rng);
    randomize_embedding(layer, rng);
    auto x = inst.x;
    const auto kmap = build_kernel_map_submanifold(x, layer.pattern);
    const auto y = swp_forward_train(x, layer, kmap);
    const auto g = swp_backward(x, layer, kmap, y);
    auto loss = [&] { return half_squared_norm(swp_forward_train(x, layer, kmap)); };
    const auto fd_w = central_differences(layer.weights, loss, 1e-5);
    const auto fd_e = central_differences(layer.embedding, loss, 1e-5);
    const auto fd_x = central_differences(x.mutable_features().data(), loss, 1e-5);
    CHECK(norm_rel_err(concat({g.d_weights, g.d_embedding, g.d_input.data()}), concat({fd_w, fd_e, fd_x})) <= 1e-6);
  }
}

TEST_CASE("swp backward: embedding gradient is zero at inactive offsets") {
  const auto x = tensor({{0, 0, 0}, {1, 0, 0}}, {1.0, 2.0}, 1);
  SplitMix64 rng(6);
  auto layer = init_swp_layer<double>(5, 1, 2, rng);
  randomize_embedding(layer, rng);
  const auto kmap = build_kernel_map_submanifold(x, layer.pattern);
  const auto g = swp_backward(x, layer, kmap, random_matrix(2, 2, rng));
  for (std::size_t k = 0; k < layer.pattern.size(); ++k) {
    const Coord3 off = layer.pattern.offsets[k];
    const bool active = off == Coord3{0, 0, 0} || off == Coord3{1, 0, 0} || off == Coord3{-1, 0, 0};
    if (!active) CHECK(g.d_embedding[k] == 0.0);
    else CHECK(g.d_embedding[k] != 0.0);
  }
}

TEST_CASE("swp weight gradient is the group sum of tiled plain gradients") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Instance inst = random_instance(seed, 200, 10, 4);
    SplitMix64 rng(seed + 90);
    const auto layer = init_swp_layer<double>(inst.kernel_size, inst.x.channels(), inst.c_out, rng);
    const auto kmap = build_kernel_map_submanifold(inst.x, layer.pattern);
    const auto dy = random_matrix(inst.x.size(), inst.c_out, rng);
    const auto gs = swp_backward(inst.x, layer, kmap, dy);
    const auto gp = conv_backward_plain(inst.x, layer.tiled(), kmap, dy);
    const std::size_t slice = layer.c_in * layer.c_out;
    std::vector<double> summed(27 * slice, 0.0);
    for (std::size_t k = 0; k < layer.pattern.size(); ++k) {
      const auto g = static_cast<std::size_t>(oracle_group(layer.pattern.offsets[k]));
      for (std::size_t i = 0; i < slice; ++i) summed[g * slice + i] += gp.d_weights[k * slice + i];
    }
    CHECK(max_rel_err(gs.d_weights, summed) <= 1e-12);
    CHECK(max_rel_err(gs.d_input, gp.d_input) <= 1e-12);
  }
}

TEST_CASE("adjoint identity") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Instance inst = random_instance(seed);
    SplitMix64 rng(seed + 120);
    const auto plain = init_plain_layer<double>(enumerate_offsets(inst.kernel_size), inst.x.channels(), inst.c_out, rng);
    const auto swp = init_swp_layer<double>(inst.kernel_size, inst.x.channels(), inst.c_out, rng);
    for (int stride : {1, 2}) {
      const auto kmap = stride == 1 ? build_kernel_map_submanifold(inst.x, plain.pattern)
                                    : build_kernel_map_regular(inst.x, plain.pattern, stride);
      const auto dy = random_matrix(kmap.n_out(), inst.c_out, rng);
      const auto yp = conv_forward_plain(inst.x, plain, kmap);
      const auto gp = conv_backward_plain(inst.x, plain, kmap, dy);
      const double lhs = dot(yp.data(), dy.data()), rhs = dot(inst.x.features().data(), gp.d_input.data());
      CHECK(std::abs(lhs - rhs) <= 1e-12 * norm(yp.data()) * norm(dy.data()) + 1e-300);

      const auto ys = swp_forward_train(inst.x, swp, kmap);
      const auto gs = swp_backward(inst.x, swp, kmap, dy);
      const double ls = dot(ys.data(), dy.data()), rs = dot(inst.x.features().data(), gs.d_input.data());
      CHECK(std::abs(ls - rs) <= 1e-12 * norm(ys.data()) * norm(dy.data()) + 1e-300);
    }
  }
}

TEST_CASE("shape and partition errors") {
  const auto x = random_scene<double>(SceneSpec::cube(20, 0, 4, 2, 1));
  SplitMix64 rng(1);
  const auto plain = init_plain_layer<double>(enumerate_offsets(3), 3, 2, rng);
  const auto kmap3 = build_kernel_map_submanifold(x, enumerate_offsets(3));
  CHECK_THROWS_AS(conv_forward_plain(x, plain, kmap3), ShapeError);

  const auto good = init_plain_layer<double>(enumerate_offsets(3), 2, 2, rng);
  CHECK_THROWS_AS(conv_forward_plain(x, good, build_kernel_map_submanifold(x, enumerate_offsets(5))), ShapeError);
  CHECK_THROWS_AS(conv_backward_plain(x, good, kmap3, Matrix<double>(3, 2)), ShapeError);

  const auto other = random_scene<double>(SceneSpec::cube(21, 0, 4, 2, 2));
  CHECK_THROWS_AS(conv_forward_plain(other, good, kmap3), ShapeError);

  const auto swp = init_swp_layer<double>(5, 2, 2, rng);
  CHECK_THROWS_AS(swp_forward_train(x, swp, kmap3), PartitionMismatch);
  CHECK_THROWS_AS(swp_forward_shrunk(x, swp, group_kernel_map(kmap3, partition_offsets(3))), PartitionMismatch);
  CHECK_THROWS_AS(swp_backward(x, swp, kmap3, Matrix<double>(x.size(), 2)), PartitionMismatch);
  CHECK_THROWS_AS(SwpConvLayer<double>(1, 2, 2), InvalidKernelSize);
}

TEST_CASE("f32 forward agrees with f64 to single precision") {
  const auto x = random_scene<double>(SceneSpec::cube(500, 0, 15, 8, 3));
  SplitMix64 rng(2);
  auto swp = init_swp_layer<double>(7, 8, 8, rng);
  const auto kmap = build_kernel_map_submanifold(x, swp.pattern);
  const auto y64 = swp_forward_shrunk(x, swp, group_kernel_map(kmap, swp.gmap));
  SwpConvLayer<float> s32(7, 8, 8);
  std::ranges::transform(swp.weights, s32.weights.begin(), [](double v) { return float(v); });
  const auto x32 = tensor_cast<float>(x);
  const auto y32 = swp_forward_shrunk(x32, s32, group_kernel_map(kmap, s32.gmap));
  CHECK(max_rel_err(matrix_cast<double>(y32), y64) <= 1e-5);
}
