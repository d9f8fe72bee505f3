#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "egoav/image.hpp"
#include "egoav/random.hpp"
#include "egoav/tensor.hpp"

namespace egoav {

// ---------------------------------------------------------------------------
// 3x3 matrix in double precision, row-major. Used for homographies and the
// synthetic camera model.
// ---------------------------------------------------------------------------
struct Mat3 {
  std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

  static Mat3 identity() { return Mat3{}; }

  double& operator()(int r, int c) { return m[static_cast<std::size_t>(r) * 3 + c]; }
  double operator()(int r, int c) const { return m[static_cast<std::size_t>(r) * 3 + c]; }

  Mat3 operator*(const Mat3& o) const {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double s = 0;
        for (int k = 0; k < 3; ++k) s += (*this)(i, k) * o(k, j);
        r(i, j) = s;
      }
    return r;
  }

  double det() const {
    return m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
           m[2] * (m[3] * m[7] - m[4] * m[6]);
  }

  // Returns nullopt when |det| is below `eps`.
  std::optional<Mat3> inverse(double eps = 1e-12) const {
    const double d = det();
    if (std::abs(d) < eps) return std::nullopt;
    const double inv = 1.0 / d;
    Mat3 r;
    r.m[0] = (m[4] * m[8] - m[5] * m[7]) * inv;
    r.m[1] = (m[2] * m[7] - m[1] * m[8]) * inv;
    r.m[2] = (m[1] * m[5] - m[2] * m[4]) * inv;
    r.m[3] = (m[5] * m[6] - m[3] * m[8]) * inv;
    r.m[4] = (m[0] * m[8] - m[2] * m[6]) * inv;
    r.m[5] = (m[2] * m[3] - m[0] * m[5]) * inv;
    r.m[6] = (m[3] * m[7] - m[4] * m[6]) * inv;
    r.m[7] = (m[1] * m[6] - m[0] * m[7]) * inv;
    r.m[8] = (m[0] * m[4] - m[1] * m[3]) * inv;
    return r;
  }

  // Projective action on an inhomogeneous 2-D point (x, y).
  std::array<double, 2> apply(double x, double y) const {
    const double w = m[6] * x + m[7] * y + m[8];
    return {(m[0] * x + m[1] * y + m[2]) / w, (m[3] * x + m[4] * y + m[5]) / w};
  }

  // Scale so the bottom-right entry is 1.
  Mat3 normalized() const {
    Mat3 r = *this;
    const double s = m[8];
    if (s != 0.0)
      for (double& v : r.m) v /= s;
    return r;
  }

  bool all_finite() const {
    for (double v : m)
      if (!std::isfinite(v)) return false;
    return true;
  }
};

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

// T RGB frames of one clip. All frames share one size; center_index picks the
// query frame.
struct FrameSequence {
  std::vector<Image> frames;
  std::vector<int> frame_indices;
  int center_index = 0;
  double fps = 0.0;

  int count() const { return static_cast<int>(frames.size()); }
  void validate() const;
};

struct Waveform {
  std::vector<float> samples;
  double sample_rate = 0.0;

  double duration() const {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
  }
  void validate() const;
};

// Magnitude time-frequency grid; rows are frequency bins, columns time frames.
struct Spectrogram {
  Tensor<float> values;     // (h_s, w_s), non-negative
  int freq_bin_count = 0;   // bins of the underlying STFT (before resizing)
  double hop_seconds = 0.0;

  int height() const { return values.rank() == 2 ? values.dim(0) : 0; }
  int width() const { return values.rank() == 2 ? values.dim(1) : 0; }
  void validate() const;
};

enum class Modality { visual, audio };

template <typename T>
struct BasicFeatureGrid {
  Tensor<T> values;  // (c, h, w)
  Modality modality = Modality::visual;
  // Frame pixels per grid cell; meaningful for visual grids only.
  double frame_coordinate_scale = 1.0;

  int channels() const { return values.rank() == 3 ? values.dim(0) : 0; }
  int height() const { return values.rank() == 3 ? values.dim(1) : 0; }
  int width() const { return values.rank() == 3 ? values.dim(2) : 0; }
};

using FeatureGrid = BasicFeatureGrid<float>;

// 3x3 projective transform between two frame coordinate systems. An invalid
// homography is exactly the identity (the pipeline-wide fallback).
struct Homography {
  Mat3 matrix;
  bool valid = false;
  int inlier_count = 0;
  int source_frame = -1;
  int target_frame = -1;

  static Homography invalid_identity(int source = -1, int target = -1) {
    Homography h;
    h.matrix = Mat3::identity();
    h.valid = false;
    h.inlier_count = 0;
    h.source_frame = source;
    h.target_frame = target;
    return h;
  }
  void validate() const;
};

struct BoundingBox {
  double x_min = 0, y_min = 0, x_max = 0, y_max = 0;
  std::string label;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  double area() const { return width() * height(); }

  bool well_formed() const { return x_min < x_max && y_min < y_max; }
  bool inside_frame(int frame_height, int frame_width) const {
    return x_min >= 0 && y_min >= 0 && x_max <= frame_width && y_max <= frame_height;
  }
};

// Per-frame similarity map S and its objectness map O = sigmoid((S - eps)/tau).
struct LocalizationMap {
  Tensor<float> similarity;  // (h_v, w_v), entries in [-1, 1]
  Tensor<float> objectness;  // (h_v, w_v), entries in (0, 1)
  int frame_index = 0;
};

// One annotator's answer for one (video, frame).
struct AnnotationRecord {
  std::string video_id;
  int frame_index = 0;
  std::string annotator_id;
  std::vector<BoundingBox> selected_boxes;
  bool out_of_view_sound = false;
  std::string description;
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

// Union rasterization of axis-aligned boxes under the half-open convention:
// cell (x, y) is inside iff x_min <= x < x_max and y_min <= y < y_max.
// Throws if a box is malformed or falls outside (height, width).
Tensor<std::uint8_t> boxes_to_mask(const std::vector<BoundingBox>& boxes, int height, int width);

// Line-delimited annotation record I/O (one JSON object per line, exact field
// names of AnnotationRecord).
std::string annotation_to_json(const AnnotationRecord& rec);
AnnotationRecord annotation_from_json(const std::string& line);
std::vector<AnnotationRecord> read_annotation_file(const std::string& path);
void write_annotation_file(const std::vector<AnnotationRecord>& recs, const std::string& path);

}  // namespace egoav
