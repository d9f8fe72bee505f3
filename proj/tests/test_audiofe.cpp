#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "egoav/audiofe.hpp"
#include "egoav/random.hpp"

using namespace egoav;
using namespace egoav::audiofe;

namespace {
constexpr double kPi = 3.14159265358979323846;

Waveform sine(double freq, double rate, double seconds, double amp = 1.0) {
  Waveform w;
  w.sample_rate = rate;
  const std::size_t n = static_cast<std::size_t>(std::llround(rate * seconds));
  w.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    w.samples[i] = static_cast<float>(amp * std::sin(2 * kPi * freq * i / rate));
  return w;
}
}  // namespace

TEST_CASE("resample zeros, identity, and error paths") {
  Waveform zeros;
  zeros.sample_rate = 44100;
  zeros.samples.assign(44100, 0.f);
  const Waveform out = resample(zeros, 11025);
  CHECK(out.sample_rate == 11025);
  CHECK(out.samples.size() == 11025);
  for (float v : out.samples) CHECK(v == 0.f);

  const Waveform s = sine(100, 44100, 0.25);
  const Waveform same = resample(s, 44100);
  CHECK(same.samples == s.samples);

  Waveform empty;
  empty.sample_rate = 44100;
  CHECK_THROWS_AS(resample(empty, 11025), std::invalid_argument);
}

TEST_CASE("resample sine matches analytic evaluation") {
  const Waveform s = sine(100, 44100, 1.0);
  const Waveform out = resample(s, 11025);
  CHECK(out.samples.size() == 11025);
  // Skip the filter-length edges where the window is truncated.
  const int guard = 64;
  double max_err = 0;
  for (int i = guard; i < static_cast<int>(out.samples.size()) - guard; ++i) {
    const double expect = std::sin(2 * kPi * 100 * i / 11025.0);
    max_err = std::max(max_err, std::abs(out.samples[i] - expect));
  }
  CHECK(max_err < 1e-3);
}

TEST_CASE("stft of silence is zero and shapes are right") {
  StftConfig cfg;
  Waveform zeros;
  zeros.sample_rate = cfg.sample_rate;
  zeros.samples.assign(11025, 0.f);
  const Spectrogram spec = stft_magnitude(zeros, cfg);
  CHECK(spec.height() == 128);
  CHECK(spec.width() == 128);
  CHECK(spec.values.max() == 0.f);
  CHECK_NOTHROW(spec.validate());

  Waveform tiny;
  tiny.sample_rate = cfg.sample_rate;
  tiny.samples.assign(100, 0.f);  // shorter than one window
  CHECK_THROWS_AS(stft_raw(tiny, cfg), std::invalid_argument);
}

TEST_CASE("stft tone concentrates energy at the right bin") {
  StftConfig cfg;
  const Waveform tone = sine(1000, cfg.sample_rate, 1.0, 0.8);
  const Tensor<float> raw = stft_raw(tone, cfg);
  CHECK(raw.dim(0) == cfg.freq_bins());
  // Column-mean magnitude per frequency bin; argmax must land within one bin
  // of 1000 Hz / (sample_rate / window).
  const int bins = raw.dim(0), frames = raw.dim(1);
  int argmax = 0;
  double best = -1;
  for (int k = 0; k < bins; ++k) {
    double s = 0;
    for (int t = 0; t < frames; ++t) s += raw.at(k, t);
    if (s > best) {
      best = s;
      argmax = k;
    }
  }
  const int expect = static_cast<int>(std::lround(1000.0 / (cfg.sample_rate / cfg.window_size)));
  CHECK(std::abs(argmax - expect) <= 1);
}

TEST_CASE("stft Parseval-style energy check on noise") {
  StftConfig cfg;
  RandomStream rng(5);
  Waveform noise;
  noise.sample_rate = cfg.sample_rate;
  noise.samples.resize(11025);
  for (auto& v : noise.samples) v = static_cast<float>(rng.uniform(-0.5, 0.5));
  const Tensor<float> raw = stft_raw(noise, cfg);

  // For a real-input DFT, sum_k |X_k|^2 over the full spectrum equals
  // N * sum_n x_n^2 (windowed). One-sided bins double except DC (and Nyquist,
  // absent for odd-ish windows; window 254 has bin 127 = N/2 exactly).
  const int win = cfg.window_size, hop = cfg.hop;
  const int frames = raw.dim(1);
  std::vector<double> hann(win);
  for (int i = 0; i < win; ++i) hann[i] = 0.5 - 0.5 * std::cos(2 * kPi * i / (win - 1));
  double spec_energy = 0, sig_energy = 0;
  for (int t = 0; t < frames; ++t) {
    for (int k = 0; k < raw.dim(0); ++k) {
      const double m2 = static_cast<double>(raw.at(k, t)) * raw.at(k, t);
      const bool doubled = k != 0 && k != win / 2;
      spec_energy += doubled ? 2 * m2 : m2;
    }
    for (int i = 0; i < win; ++i) {
      const double v = noise.samples[t * hop + i] * hann[i];
      sig_energy += v * v;
    }
  }
  spec_energy /= win;
  CHECK(spec_energy == doctest::Approx(sig_energy).epsilon(0.01));
}

TEST_CASE("stft shift covariance by one hop") {
  StftConfig cfg;
  RandomStream rng(9);
  Waveform noise;
  noise.sample_rate = cfg.sample_rate;
  noise.samples.resize(6000);
  for (auto& v : noise.samples) v = static_cast<float>(rng.uniform(-0.5, 0.5));

  Waveform delayed;
  delayed.sample_rate = cfg.sample_rate;
  delayed.samples.assign(noise.samples.begin() + cfg.hop, noise.samples.end());

  const Tensor<float> a = stft_raw(noise, cfg);
  const Tensor<float> b = stft_raw(delayed, cfg);
  for (int k = 0; k < b.dim(0); ++k)
    for (int t = 0; t < b.dim(1); ++t)
      CHECK(b.at(k, t) == doctest::Approx(a.at(k, t + 1)).epsilon(1e-5));
}

TEST_CASE("mix identities and exact elementwise oracle") {
  const Waveform s = sine(330, 11025, 0.5, 0.4);
  Waveform zeros;
  zeros.sample_rate = 11025;
  zeros.samples.assign(s.samples.size(), 0.f);
  CHECK(mix(s, zeros).samples == s.samples);

  Waveform neg = s;
  for (auto& v : neg.samples) v = -v;
  const Waveform cancelled = mix(s, neg);
  for (float v : cancelled.samples) CHECK(v == 0.f);

  const Waveform a = sine(330, 11025, 0.5, 0.4);
  const Waveform b = sine(700, 11025, 0.5, 0.3);
  const Waveform m = mix(a, b);
  for (std::size_t i = 0; i < m.samples.size(); ++i)
    CHECK(m.samples[i] == a.samples[i] + b.samples[i]);

  Waveform other_rate = b;
  other_rate.sample_rate = 22050;
  CHECK_THROWS_AS(mix(a, other_rate), std::invalid_argument);
}

TEST_CASE("mix in 64-bit test mode is commutative and associative") {
  // The pipeline type is float; the oracle property is exact in double.
  RandomStream rng(3);
  std::vector<double> a(256), b(256), c(256);
  for (int i = 0; i < 256; ++i) {
    a[i] = rng.uniform(-1, 1);
    b[i] = rng.uniform(-1, 1);
    c[i] = rng.uniform(-1, 1);
  }
  for (int i = 0; i < 256; ++i) {
    CHECK(a[i] + b[i] == b[i] + a[i]);
    CHECK((a[i] + b[i]) + c[i] == doctest::Approx(a[i] + (b[i] + c[i])).epsilon(1e-15));
  }
}

TEST_CASE("ground_truth_mask oracle and trivial cases") {
  StftConfig cfg;
  const Waveform tone = sine(800, cfg.sample_rate, 1.0, 0.5);
  const Spectrogram x1 = stft_magnitude(tone, cfg);

  // Second source silent: the mixture equals x1, so the mask is all ones.
  const BinaryMask all_one = ground_truth_mask(x1, x1);
  for (std::size_t i = 0; i < all_one.values.size(); ++i) CHECK(all_one.values[i] == 1);

  Spectrogram zeros = x1;
  zeros.values.fill(0.f);
  Spectrogram pos = x1;
  for (std::size_t i = 0; i < pos.values.size(); ++i) pos.values[i] += 0.25f;
  const BinaryMask all_zero = ground_truth_mask(zeros, pos);
  for (std::size_t i = 0; i < all_zero.values.size(); ++i) CHECK(all_zero.values[i] == 0);

  // Random grids: exact elementwise-comparison oracle, plus idempotence.
  RandomStream rng(11);
  Spectrogram a = x1, b = x1;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    a.values[i] = static_cast<float>(rng.uniform());
    b.values[i] = static_cast<float>(rng.uniform());
  }
  const BinaryMask m1 = ground_truth_mask(a, b);
  const BinaryMask m2 = ground_truth_mask(a, b);
  for (std::size_t i = 0; i < m1.values.size(); ++i) {
    const std::uint8_t want = a.values[i] >= b.values[i] ? 1 : 0;
    CHECK(m1.values[i] == want);
    CHECK(m2.values[i] == m1.values[i]);
    CHECK((m1.values[i] == 0 || m1.values[i] == 1));
  }

  Spectrogram small = a;
  small.values = Tensor<float>({64, 64});
  CHECK_THROWS_AS(ground_truth_mask(small, b), std::invalid_argument);
}

TEST_CASE("pcm16 round trip") {
  namespace fs = std::filesystem;
  const Waveform s = sine(440, 11025, 0.1, 0.7);
  const auto path = (fs::temp_directory_path() / "egoav_pcm_test.pcm").string();
  write_pcm16(s, path);
  const Waveform back = read_pcm16(path, 11025);
  REQUIRE(back.samples.size() == s.samples.size());
  // Quantization step is 1/32767; write->read->write is stable.
  for (std::size_t i = 0; i < s.samples.size(); ++i)
    CHECK(std::abs(back.samples[i] - s.samples[i]) <= 1.f / 32767.f + 1e-6f);
  write_pcm16(back, path + ".2");
  const Waveform back2 = read_pcm16(path + ".2", 11025);
  CHECK(back2.samples == back.samples);
  fs::remove(path);
  fs::remove(path + ".2");
}
