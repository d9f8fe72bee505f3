#pragma once

#include <string>
#include <vector>

#include "egoav/tensor.hpp"

namespace egoav {

// Interleaved RGB image, float values in [0,1], (x right, y down), pixel
// centers at integer coordinates.
struct Image {
  int height = 0;
  int width = 0;
  std::vector<float> rgb;  // height*width*3

  Image() = default;
  Image(int h, int w) : height(h), width(w), rgb(static_cast<std::size_t>(h) * w * 3, 0.f) {}

  float& at(int y, int x, int c) { return rgb[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }
  float at(int y, int x, int c) const {
    return rgb[(static_cast<std::size_t>(y) * width + x) * 3 + c];
  }

  bool same_size(const Image& o) const { return height == o.height && width == o.width; }

  // Bilinear sample of one channel; out-of-bounds taps are clamped to the edge.
  float sample_clamped(double y, double x, int c) const;

  // Luma grid used by the corner detector.
  Tensor<float> to_gray() const;

  // (3, H, W) planar tensor for the visual encoder.
  Tensor<float> to_tensor() const;
  static Image from_tensor(const Tensor<float>& t);
};

Image resize_bilinear(const Image& img, int out_h, int out_w);

// 2-D grid resize (spectrograms, heatmaps). Align-corners-free convention:
// output cell centers map to input coordinates via the size ratio.
template <typename T>
Tensor<T> resize_bilinear_grid(const Tensor<T>& grid, int out_h, int out_w) {
  if (grid.rank() != 2) throw std::invalid_argument("resize_bilinear_grid: rank-2 input required");
  const int in_h = grid.dim(0), in_w = grid.dim(1);
  Tensor<T> out({out_h, out_w});
  const double sy = static_cast<double>(in_h) / out_h;
  const double sx = static_cast<double>(in_w) / out_w;
  for (int oy = 0; oy < out_h; ++oy) {
    double fy = (oy + 0.5) * sy - 0.5;
    fy = std::min(std::max(fy, 0.0), static_cast<double>(in_h - 1));
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, in_h - 1);
    const double wy = fy - y0;
    for (int ox = 0; ox < out_w; ++ox) {
      double fx = (ox + 0.5) * sx - 0.5;
      fx = std::min(std::max(fx, 0.0), static_cast<double>(in_w - 1));
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, in_w - 1);
      const double wx = fx - x0;
      const double v = (1 - wy) * ((1 - wx) * grid.at(y0, x0) + wx * grid.at(y0, x1)) +
                       wy * ((1 - wx) * grid.at(y1, x0) + wx * grid.at(y1, x1));
      out.at(oy, ox) = static_cast<T>(v);
    }
  }
  return out;
}

// Binary PPM (P6, 8-bit) I/O. Values quantize as round(v*255) on write and
// dequantize as u8/255 on read, so write -> read -> write is bit-stable.
void write_ppm(const Image& img, const std::string& path);
Image read_ppm(const std::string& path);

}  // namespace egoav
