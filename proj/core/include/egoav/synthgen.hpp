#pragma once

#include <optional>
#include <string>
#include <vector>

#include "egoav/core.hpp"

namespace egoav::synthgen {

// Planar synthetic scenes: a textured world plane observed through a moving
// camera with exact per-pair homographies, one textured sounding object whose
// class picks its tone, and an optional off-screen distractor tone.
struct SceneConfig {
  int frame_height = 64;
  int frame_width = 64;
  int frame_count = 5;  // T
  double fps = 15.0;
  double clip_seconds = 1.0;
  double sample_rate = 11025.0;

  int class_count = 4;
  // Motion ranges scale linearly with this; 1.0 is mild head motion, ~2-3 is
  // motion-heavy.
  double motion_magnitude = 1.0;
  double min_overlap = 0.6;  // consecutive-frame viewport overlap fraction
  int max_retries = 8;

  double object_min_frac = 0.30;  // object side / frame side
  double object_max_frac = 0.45;

  bool distractor_enabled = false;
  double distractor_snr_db = 0.0;  // object-to-distractor amplitude ratio in dB
  double tone_amplitude = 0.45;

  int world_size = 192;

  // Test hooks: restrict camera steps to integer translations, or skip
  // rendering the object (background-only twin of a clip).
  bool translation_only = false;
  bool render_object = true;

  void validate() const;
};

struct ClipRecord {
  std::string video_id;
  std::uint64_t seed = 0;
  int class_id = 0;
  FrameSequence frames;
  Waveform audio;             // natural clip audio (object + distractor when enabled)
  Waveform object_audio;      // clean object source
  Waveform distractor_audio;  // empty when the distractor is disabled
  // Exact generator homographies, [j][i] = frame j -> frame i, all valid.
  std::vector<std::vector<Homography>> gt_homographies;
  // Per-frame object box; nullopt when the object is (almost) out of view.
  std::vector<std::optional<BoundingBox>> gt_boxes;
  SceneConfig config;
};

// Class tone table (Hz); distractor tones come from a disjoint set.
double class_tone_hz(int class_id);
double distractor_tone_hz(int class_id);
std::string class_label(int class_id);

// Deterministic clip synthesis. Throws after bounded retries if the motion
// bound cannot be satisfied.
ClipRecord gen_clip(std::uint64_t seed, const SceneConfig& cfg);

// ---------------------------------------------------------------------------
// Dataset on disk
// ---------------------------------------------------------------------------

struct ManifestEntry {
  std::string id;
  std::string path;  // relative clip directory
  std::string split; // train | val | test
  int class_id = 0;
  std::uint64_t seed = 0;
};

struct Manifest {
  std::vector<ManifestEntry> clips;
  SceneConfig config;

  std::vector<ManifestEntry> split(const std::string& name) const;
};

// Writes one subdirectory per clip (frames as PPM, audio as raw PCM s16le,
// ground truth as JSON) plus manifest.json. Splits are assigned 80/10/10 by
// ordering clips on a hash of their seed, so fractions are exact to +-1 clip.
Manifest write_dataset(const std::vector<ClipRecord>& clips, const std::string& directory);

Manifest read_manifest(const std::string& directory);

// Reloads one clip from disk (frames, audio streams, ground truth).
ClipRecord load_clip(const std::string& dataset_dir, const ManifestEntry& entry);

}  // namespace egoav::synthgen
