#pragma once

#include <cstdint>
#include <string>

#include "egoav/core.hpp"

namespace egoav::audiofe {

// STFT frontend settings. Defaults follow the training recipe: 11.025 kHz
// audio, Hann window of 254 samples, hop 64, magnitudes resized to 128x128.
struct StftConfig {
  double sample_rate = 11025.0;
  int window_size = 254;
  int hop = 64;
  int output_height = 128;  // frequency axis after resizing
  int output_width = 128;   // time axis after resizing

  int freq_bins() const { return window_size / 2 + 1; }
  void validate() const;
};

struct BinaryMask {
  Tensor<std::uint8_t> values;  // (h_s, w_s), entries in {0,1}

  int height() const { return values.rank() == 2 ? values.dim(0) : 0; }
  int width() const { return values.rank() == 2 ? values.dim(1) : 0; }
};

// Windowed-sinc resampler. Duration is preserved within one sample.
Waveform resample(const Waveform& w, double target_rate);

// Magnitude STFT before resizing: (freq_bins, n_frames), Hann window, no
// padding, frame t covering samples [t*hop, t*hop + window_size).
Tensor<float> stft_raw(const Waveform& w, const StftConfig& cfg);

// Magnitude spectrogram resized to cfg.output size.
Spectrogram stft_magnitude(const Waveform& w, const StftConfig& cfg);

// Sample-wise sum; lengths are trimmed to the shorter input.
Waveform mix(const Waveform& s1, const Waveform& s2);

// M_gt(u,v) = [X1(u,v) >= Xmix(u,v)], evaluated at the resized resolution.
BinaryMask ground_truth_mask(const Spectrogram& x1, const Spectrogram& xmix);

// Raw mono PCM (s16le) files; the dataset's on-disk audio format.
Waveform read_pcm16(const std::string& path, double sample_rate);
void write_pcm16(const Waveform& w, const std::string& path);

}  // namespace egoav::audiofe
