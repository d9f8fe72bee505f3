#include <benchmark/benchmark.h>

#include <cmath>

#include "egoav/audiofe.hpp"

namespace {

void BM_StftMagnitude(benchmark::State& state) {
  egoav::audiofe::StftConfig cfg;
  egoav::Waveform w;
  w.sample_rate = cfg.sample_rate;
  w.samples.resize(11025);
  for (std::size_t i = 0; i < w.samples.size(); ++i)
    w.samples[i] = static_cast<float>(std::sin(2 * 3.14159265358979 * 800 * i / 11025.0));
  for (auto _ : state) {
    auto spec = egoav::audiofe::stft_magnitude(w, cfg);
    benchmark::DoNotOptimize(spec.values.data());
  }
}
BENCHMARK(BM_StftMagnitude);

void BM_Resample4x(benchmark::State& state) {
  egoav::Waveform w;
  w.sample_rate = 44100;
  w.samples.resize(44100);
  for (std::size_t i = 0; i < w.samples.size(); ++i)
    w.samples[i] = static_cast<float>(std::sin(2 * 3.14159265358979 * 440 * i / 44100.0));
  for (auto _ : state) {
    auto out = egoav::audiofe::resample(w, 11025);
    benchmark::DoNotOptimize(out.samples.data());
  }
}
BENCHMARK(BM_Resample4x);

}  // namespace
