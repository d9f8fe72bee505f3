#include "egoav/audiofe.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <vector>

#include "egoav/image.hpp"

namespace egoav::audiofe {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

void StftConfig::validate() const {
  if (sample_rate <= 0) throw std::invalid_argument("StftConfig: sample_rate must be positive");
  if (!(window_size > hop && hop > 0))
    throw std::invalid_argument("StftConfig: require window_size > hop > 0");
  if (output_height <= 0 || output_width <= 0)
    throw std::invalid_argument("StftConfig: output size must be positive");
}

Waveform resample(const Waveform& w, double target_rate) {
  w.validate();
  if (target_rate <= 0) throw std::invalid_argument("resample: target_rate must be positive");
  if (w.samples.empty()) throw std::invalid_argument("resample: empty waveform");
  if (target_rate == w.sample_rate) return w;

  const double ratio = w.sample_rate / target_rate;  // input samples per output sample
  const std::size_t out_len = static_cast<std::size_t>(
      std::llround(static_cast<double>(w.samples.size()) * target_rate / w.sample_rate));

  // Hann-windowed sinc interpolation, low-passed at the smaller Nyquist when
  // downsampling. 32 zero crossings per side.
  const double cutoff = std::min(1.0, 1.0 / ratio);  // relative to input Nyquist
  const int half_width = static_cast<int>(std::ceil(32.0 / cutoff));

  Waveform out;
  out.sample_rate = target_rate;
  out.samples.resize(out_len);
  const auto& in = w.samples;
  const int n = static_cast<int>(in.size());
  for (std::size_t i = 0; i < out_len; ++i) {
    const double center = static_cast<double>(i) * ratio;
    const int lo = std::max(0, static_cast<int>(std::floor(center)) - half_width + 1);
    const int hi = std::min(n - 1, static_cast<int>(std::floor(center)) + half_width);
    double acc = 0.0;
    for (int k = lo; k <= hi; ++k) {
      const double x = (k - center) * cutoff;
      double s;
      if (std::abs(x) < 1e-12) {
        s = 1.0;
      } else {
        s = std::sin(kPi * x) / (kPi * x);
      }
      const double window_pos = (k - center) / half_width;  // in (-1, 1)
      const double hann = 0.5 + 0.5 * std::cos(kPi * window_pos);
      acc += static_cast<double>(in[k]) * s * cutoff * hann;
    }
    out.samples[i] = static_cast<float>(acc);
  }
  return out;
}

Tensor<float> stft_raw(const Waveform& w, const StftConfig& cfg) {
  cfg.validate();
  w.validate();
  if (w.sample_rate != cfg.sample_rate)
    throw std::invalid_argument("stft_raw: waveform sample_rate does not match config");
  const int win = cfg.window_size;
  const int n = static_cast<int>(w.samples.size());
  if (n < win) throw std::invalid_argument("stft_raw: waveform shorter than one window");
  const int n_frames = (n - win) / cfg.hop + 1;
  const int bins = cfg.freq_bins();

  // Direct windowed DFT with precomputed basis. Window sizes here are small
  // (254 samples, ~170 frames), so this costs ~10 MFLOP per spectrogram.
  std::vector<float> hann(static_cast<std::size_t>(win));
  for (int i = 0; i < win; ++i)
    hann[i] = static_cast<float>(0.5 - 0.5 * std::cos(2.0 * kPi * i / (win - 1)));

  std::vector<float> cos_tab(static_cast<std::size_t>(bins) * win);
  std::vector<float> sin_tab(static_cast<std::size_t>(bins) * win);
  for (int k = 0; k < bins; ++k) {
    for (int i = 0; i < win; ++i) {
      const double a = 2.0 * kPi * k * i / win;
      cos_tab[static_cast<std::size_t>(k) * win + i] = static_cast<float>(std::cos(a));
      sin_tab[static_cast<std::size_t>(k) * win + i] = static_cast<float>(std::sin(a));
    }
  }

  Tensor<float> mag({bins, n_frames});
  std::vector<float> frame(static_cast<std::size_t>(win));
  for (int t = 0; t < n_frames; ++t) {
    const int off = t * cfg.hop;
    for (int i = 0; i < win; ++i) frame[i] = w.samples[off + i] * hann[i];
    for (int k = 0; k < bins; ++k) {
      const float* ct = &cos_tab[static_cast<std::size_t>(k) * win];
      const float* st = &sin_tab[static_cast<std::size_t>(k) * win];
      float re = 0.f, im = 0.f;
      for (int i = 0; i < win; ++i) {
        re += frame[i] * ct[i];
        im -= frame[i] * st[i];
      }
      mag.at(k, t) = std::sqrt(re * re + im * im);
    }
  }
  return mag;
}

Spectrogram stft_magnitude(const Waveform& w, const StftConfig& cfg) {
  Tensor<float> raw = stft_raw(w, cfg);
  Spectrogram spec;
  spec.values = resize_bilinear_grid(raw, cfg.output_height, cfg.output_width);
  spec.freq_bin_count = cfg.freq_bins();
  spec.hop_seconds = cfg.hop / cfg.sample_rate;
  // Bilinear interpolation of non-negative values stays non-negative; clamp
  // away any -0 artifacts.
  for (std::size_t i = 0; i < spec.values.size(); ++i)
    spec.values[i] = std::max(spec.values[i], 0.f);
  return spec;
}

Waveform mix(const Waveform& s1, const Waveform& s2) {
  s1.validate();
  s2.validate();
  if (s1.sample_rate != s2.sample_rate)
    throw std::invalid_argument("mix: sample rate mismatch");
  const std::size_t n = std::min(s1.samples.size(), s2.samples.size());
  Waveform out;
  out.sample_rate = s1.sample_rate;
  out.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.samples[i] = s1.samples[i] + s2.samples[i];
  return out;
}

BinaryMask ground_truth_mask(const Spectrogram& x1, const Spectrogram& xmix) {
  if (!x1.values.same_shape(xmix.values))
    throw std::invalid_argument("ground_truth_mask: spectrogram shape mismatch");
  BinaryMask m;
  m.values = Tensor<std::uint8_t>({x1.height(), x1.width()});
  for (std::size_t i = 0; i < x1.values.size(); ++i)
    m.values[i] = x1.values[i] >= xmix.values[i] ? 1 : 0;
  return m;
}

Waveform read_pcm16(const std::string& path, double sample_rate) {
  std::ifstream f(path, std::ios::binary | std::ios::ate);
  if (!f) throw std::runtime_error("read_pcm16: cannot open " + path);
  const std::streamsize bytes = f.tellg();
  if (bytes % 2 != 0) throw std::runtime_error("read_pcm16: odd byte count in " + path);
  f.seekg(0);
  std::vector<std::int16_t> raw(static_cast<std::size_t>(bytes) / 2);
  f.read(reinterpret_cast<char*>(raw.data()), bytes);
  if (!f) throw std::runtime_error("read_pcm16: short read from " + path);
  Waveform w;
  w.sample_rate = sample_rate;
  w.samples.resize(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i)
    w.samples[i] = static_cast<float>(raw[i]) / 32767.f;
  return w;
}

void write_pcm16(const Waveform& w, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("write_pcm16: cannot open " + path);
  std::vector<std::int16_t> raw(w.samples.size());
  for (std::size_t i = 0; i < w.samples.size(); ++i) {
    float v = std::min(std::max(w.samples[i], -1.f), 1.f);
    raw[i] = static_cast<std::int16_t>(std::lround(v * 32767.f));
  }
  f.write(reinterpret_cast<const char*>(raw.data()),
          static_cast<std::streamsize>(raw.size() * 2));
  if (!f) throw std::runtime_error("write_pcm16: short write to " + path);
}

}  // namespace egoav::audiofe
