#include "egoav/image.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace egoav {

float Image::sample_clamped(double y, double x, int c) const {
  double fy = std::min(std::max(y, 0.0), static_cast<double>(height - 1));
  double fx = std::min(std::max(x, 0.0), static_cast<double>(width - 1));
  const int y0 = static_cast<int>(fy);
  const int x0 = static_cast<int>(fx);
  const int y1 = std::min(y0 + 1, height - 1);
  const int x1 = std::min(x0 + 1, width - 1);
  const double wy = fy - y0, wx = fx - x0;
  return static_cast<float>((1 - wy) * ((1 - wx) * at(y0, x0, c) + wx * at(y0, x1, c)) +
                            wy * ((1 - wx) * at(y1, x0, c) + wx * at(y1, x1, c)));
}

Tensor<float> Image::to_gray() const {
  Tensor<float> g({height, width});
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      g.at(y, x) = 0.299f * at(y, x, 0) + 0.587f * at(y, x, 1) + 0.114f * at(y, x, 2);
  return g;
}

Tensor<float> Image::to_tensor() const {
  Tensor<float> t({3, height, width});
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x) t.at(c, y, x) = at(y, x, c);
  return t;
}

Image Image::from_tensor(const Tensor<float>& t) {
  if (t.rank() != 3 || t.dim(0) != 3)
    throw std::invalid_argument("Image::from_tensor: (3,H,W) tensor required");
  Image img(t.dim(1), t.dim(2));
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < img.height; ++y)
      for (int x = 0; x < img.width; ++x) img.at(y, x, c) = t.at(c, y, x);
  return img;
}

Image resize_bilinear(const Image& img, int out_h, int out_w) {
  Image out(out_h, out_w);
  const double sy = static_cast<double>(img.height) / out_h;
  const double sx = static_cast<double>(img.width) / out_w;
  for (int y = 0; y < out_h; ++y) {
    const double fy = (y + 0.5) * sy - 0.5;
    for (int x = 0; x < out_w; ++x) {
      const double fx = (x + 0.5) * sx - 0.5;
      for (int c = 0; c < 3; ++c) out.at(y, x, c) = img.sample_clamped(fy, fx, c);
    }
  }
  return out;
}

void write_ppm(const Image& img, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("write_ppm: cannot open " + path);
  f << "P6\n" << img.width << " " << img.height << "\n255\n";
  std::vector<unsigned char> row(static_cast<std::size_t>(img.width) * 3);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      for (int c = 0; c < 3; ++c) {
        float v = img.at(y, x, c);
        v = std::min(std::max(v, 0.f), 1.f);
        row[static_cast<std::size_t>(x) * 3 + c] =
            static_cast<unsigned char>(std::lround(v * 255.f));
      }
    }
    f.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
  }
  if (!f) throw std::runtime_error("write_ppm: short write to " + path);
}

Image read_ppm(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("read_ppm: cannot open " + path);
  std::string magic;
  f >> magic;
  if (magic != "P6") throw std::runtime_error("read_ppm: not a P6 file: " + path);
  int w = 0, h = 0, maxval = 0;
  f >> w >> h >> maxval;
  if (w <= 0 || h <= 0 || maxval != 255)
    throw std::runtime_error("read_ppm: unsupported header in " + path);
  f.get();  // single whitespace after header
  Image img(h, w);
  std::vector<unsigned char> row(static_cast<std::size_t>(w) * 3);
  for (int y = 0; y < h; ++y) {
    f.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size()));
    if (!f) throw std::runtime_error("read_ppm: truncated pixel data in " + path);
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c)
        img.at(y, x, c) = static_cast<float>(row[static_cast<std::size_t>(x) * 3 + c]) / 255.f;
  }
  return img;
}

}  // namespace egoav
