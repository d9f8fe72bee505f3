#include <benchmark/benchmark.h>

#include "egoav/geometry.hpp"
#include "egoav/random.hpp"

namespace {

egoav::geometry::CorrespondenceSet synth_matches(int n, double outlier_frac,
                                                 egoav::RandomStream& rng) {
  const egoav::Mat3 h{{1.01, 0.02, 5.0, -0.015, 0.99, -3.0, 1e-4, -5e-5, 1}};
  egoav::geometry::CorrespondenceSet set;
  for (int i = 0; i < n; ++i) {
    egoav::geometry::Correspondence c;
    c.x_j = rng.uniform(0, 64);
    c.y_j = rng.uniform(0, 64);
    if (rng.uniform() < outlier_frac) {
      c.x_i = rng.uniform(0, 64);
      c.y_i = rng.uniform(0, 64);
    } else {
      const auto p = h.apply(c.x_j, c.y_j);
      c.x_i = p[0] + rng.normal() * 0.5;
      c.y_i = p[1] + rng.normal() * 0.5;
    }
    set.pairs.push_back(c);
  }
  return set;
}

void BM_EstimateHomography(benchmark::State& state) {
  egoav::RandomStream rng(7);
  const auto matches = synth_matches(200, 0.3, rng);
  egoav::geometry::RansacConfig cfg;
  cfg.seed = 99;
  for (auto _ : state) {
    auto h = egoav::geometry::estimate_homography(matches, cfg);
    benchmark::DoNotOptimize(h.inlier_count);
  }
}
BENCHMARK(BM_EstimateHomography);

void BM_WarpGrid(benchmark::State& state) {
  egoav::RandomStream rng(8);
  egoav::BasicFeatureGrid<float> g;
  g.values = egoav::Tensor<float>({32, 8, 8});
  for (std::size_t i = 0; i < g.values.size(); ++i)
    g.values[i] = static_cast<float>(rng.uniform(-1, 1));
  egoav::Homography h;
  h.valid = true;
  h.matrix = egoav::Mat3{{0.99, 0.01, 0.4, -0.02, 1.01, -0.3, 1e-4, 2e-4, 1}};
  for (auto _ : state) {
    auto out = egoav::geometry::warp_grid(g, h);
    benchmark::DoNotOptimize(out.values.data());
  }
}
BENCHMARK(BM_WarpGrid);

}  // namespace
