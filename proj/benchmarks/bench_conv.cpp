#include <benchmark/benchmark.h>

#include "egoav/kernels.hpp"
#include "egoav/parallel.hpp"
#include "egoav/random.hpp"

namespace {

egoav::Tensor<float> rand_tensor(std::vector<int> shape, egoav::RandomStream& rng) {
  egoav::Tensor<float> t(std::move(shape));
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<float>(rng.uniform(-1, 1));
  return t;
}

void BM_Conv2dForward(benchmark::State& state) {
  egoav::set_worker_threads(static_cast<int>(state.range(0)));
  egoav::RandomStream rng(1);
  const auto x = rand_tensor({1, 16, 32, 32}, rng);
  const auto w = rand_tensor({32, 16, 4, 4}, rng);
  const auto b = rand_tensor({32}, rng);
  for (auto _ : state) {
    auto y = egoav::detail::conv2d_fwd(x, w, b, 2, 1);
    benchmark::DoNotOptimize(y.data());
  }
  egoav::set_worker_threads(1);
}
BENCHMARK(BM_Conv2dForward)->Arg(1)->Arg(2);

void BM_ConvTranspose2dForward(benchmark::State& state) {
  egoav::RandomStream rng(2);
  const auto x = rand_tensor({1, 16, 32, 32}, rng);
  const auto w = rand_tensor({16, 8, 4, 4}, rng);
  const auto b = rand_tensor({8}, rng);
  for (auto _ : state) {
    auto y = egoav::detail::conv_transpose2d_fwd(x, w, b, 2, 1);
    benchmark::DoNotOptimize(y.data());
  }
}
BENCHMARK(BM_ConvTranspose2dForward);

void BM_TemporalAttention(benchmark::State& state) {
  egoav::RandomStream rng(3);
  const auto q = rand_tensor({32, 8, 8}, rng);
  std::vector<egoav::Tensor<float>> stack;
  for (int i = 0; i < 5; ++i) stack.push_back(rand_tensor({32, 8, 8}, rng));
  std::vector<const egoav::Tensor<float>*> ptrs;
  for (auto& s : stack) ptrs.push_back(&s);
  for (auto _ : state) {
    egoav::Tensor<float> weights;
    auto y = egoav::detail::temporal_attention_fwd(q, ptrs, 0.176777f, &weights);
    benchmark::DoNotOptimize(y.data());
  }
}
BENCHMARK(BM_TemporalAttention);

}  // namespace
