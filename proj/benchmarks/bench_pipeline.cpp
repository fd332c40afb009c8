#include <benchmark/benchmark.h>

#include "flowforge/cma.hpp"
#include "flowforge/effects.hpp"
#include "flowforge/grid_warp.hpp"
#include "flowforge/polygon.hpp"
#include "flowforge/scene.hpp"

using namespace flowforge;

namespace {

GridWarp bench_warp(int size) {
  MotionDraws d;
  d.scale = 1.07;
  d.angle = 0.03;
  d.translation = {1.5, -0.8};
  d.grid_offsets.assign(16, Vec2{0.0, 0.0});
  RandomStream rng = SeedPath(1).stream();
  for (Vec2& o : d.grid_offsets) o = {rng.uniform(-0.4, 0.4), rng.uniform(-0.4, 0.4)};
  return grid_warp_from_draws(d, 4, size, size, {(size - 1) * 0.5, (size - 1) * 0.5});
}

Image bench_image(int size) {
  Image img(size, size);
  RandomStream rng = SeedPath(2).stream();
  for (float& v : img.data) v = static_cast<float>(rng.next_double());
  return img;
}

void BM_invert_bilinear(benchmark::State& state) {
  const QuadCell cell{{0.1, -0.05}, {1.05, 0.1}, {-0.1, 0.95}, {1.1, 1.05}};
  double u = 0.0;
  for (auto _ : state) {
    u += 1e-7;
    auto uv = invert_bilinear(cell, {0.3 + u, 0.6});
    benchmark::DoNotOptimize(uv);
  }
}
BENCHMARK(BM_invert_bilinear);

void BM_forward_warp(benchmark::State& state) {
  const int size = static_cast<int>(state.range(0));
  const Image img = bench_image(size);
  const GridWarp g = bench_warp(size);
  for (auto _ : state) {
    Image out = forward_warp(img, g);
    benchmark::DoNotOptimize(out.data.data());
  }
  state.SetItemsProcessed(state.iterations() * size * size);
}
BENCHMARK(BM_forward_warp)->Arg(128)->Arg(256)->Arg(512);

void BM_flow_field(benchmark::State& state) {
  const int size = static_cast<int>(state.range(0));
  const GridWarp g = bench_warp(size);
  for (auto _ : state) {
    FlowField f = flow_field(g, size, size);
    benchmark::DoNotOptimize(f.data.data());
  }
}
BENCHMARK(BM_flow_field)->Arg(256)->Arg(512);

void BM_rasterize_polygon(benchmark::State& state) {
  MaskParams p;
  p.sides_min = 8;
  p.sides_max = 12;
  p.subdivisions = 2;
  PolygonSpec poly = generate_polygon(p, SeedPath(3));
  poly = place_polygon(poly, {128.0, 128.0}, 180.0);
  for (auto _ : state) {
    AlphaMask m = rasterize(poly, 256, 256);
    benchmark::DoNotOptimize(m.data.data());
  }
}
BENCHMARK(BM_rasterize_polygon);

void BM_feather(benchmark::State& state) {
  AlphaMask m(256, 256, 0.0f);
  for (int y = 100; y < 156; ++y)
    for (int x = 100; x < 156; ++x) m.at(x, y) = 1.0f;
  for (auto _ : state) {
    AlphaMask out = feather(m, static_cast<double>(state.range(0)));
    benchmark::DoNotOptimize(out.data.data());
  }
}
BENCHMARK(BM_feather)->Arg(2)->Arg(6);

void BM_generate_fog(benchmark::State& state) {
  const int size = static_cast<int>(state.range(0));
  std::uint64_t seed = 0;
  for (auto _ : state) {
    AlphaMask fog = generate_fog(size, size, 0.35, 0.08, SeedPath(seed++));
    benchmark::DoNotOptimize(fog.data.data());
  }
}
BENCHMARK(BM_generate_fog)->Arg(256)->Arg(720);

void BM_cma_generation(benchmark::State& state) {
  const std::size_t dim = static_cast<std::size_t>(state.range(0));
  CmaState s = cma_init(dim, std::vector<double>(dim, 0.5), 0.3, 8);
  std::uint64_t gen = 0;
  for (auto _ : state) {
    auto cands = cma_ask(s, SeedPath(11).child("gen", gen++));
    for (auto& c : cands) {
      double acc = 0.0;
      for (double x : c.x) acc += (x - 0.4) * (x - 0.4);
      c.score = acc;
    }
    s = cma_tell(s, cands);
    benchmark::DoNotOptimize(s.mean.data());
  }
}
BENCHMARK(BM_cma_generation)->Arg(6)->Arg(26);

}  // namespace

BENCHMARK_MAIN();
