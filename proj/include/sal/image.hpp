#ifndef SAL_IMAGE_HPP
#define SAL_IMAGE_HPP

#include <cstdint>
#include <vector>

#include "sal/errors.hpp"

namespace sal {

// 8-bit RGB raster, interleaved row-major. The universal pipeline input.
struct RasterImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;  // 3 * width * height, r g b order

  RasterImage() = default;
  RasterImage(int w, int h, std::uint8_t r = 0, std::uint8_t g = 0, std::uint8_t b = 0)
      : width(w), height(h), data(static_cast<std::size_t>(3) * w * h) {
    require(w >= 1 && h >= 1, "bad_image", "image dimensions must be positive");
    for (std::size_t i = 0; i < data.size(); i += 3) {
      data[i] = r;
      data[i + 1] = g;
      data[i + 2] = b;
    }
  }

  std::size_t offset(int x, int y) const {
    return 3 * (static_cast<std::size_t>(y) * width + x);
  }
  std::uint8_t* px(int x, int y) { return data.data() + offset(x, y); }
  const std::uint8_t* px(int x, int y) const { return data.data() + offset(x, y); }
  void set(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    auto* p = px(x, y);
    p[0] = r;
    p[1] = g;
    p[2] = b;
  }
  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
  bool empty() const { return width == 0 || height == 0; }
};

// C real-valued planes sharing one geometry (LAB, HSV, grayscale, activations).
struct PlanarImage {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<double> data;  // plane-major: channel, then row, then column

  PlanarImage() = default;
  PlanarImage(int w, int h, int c)
      : width(w), height(h), channels(c),
        data(static_cast<std::size_t>(w) * h * c, 0.0) {}

  double& at(int c, int x, int y) {
    return data[(static_cast<std::size_t>(c) * height + y) * width + x];
  }
  double at(int c, int x, int y) const {
    return data[(static_cast<std::size_t>(c) * height + y) * width + x];
  }
  double* plane(int c) { return data.data() + static_cast<std::size_t>(c) * height * width; }
  const double* plane(int c) const {
    return data.data() + static_cast<std::size_t>(c) * height * width;
  }
};

// Per-pixel saliency estimate; every value in [0,1].
struct SaliencyMap {
  int width = 0;
  int height = 0;
  std::vector<double> values;

  SaliencyMap() = default;
  SaliencyMap(int w, int h, double v = 0.0)
      : width(w), height(h), values(static_cast<std::size_t>(w) * h, v) {}

  double& at(int x, int y) { return values[static_cast<std::size_t>(y) * width + x]; }
  double at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
  std::size_t size() const { return values.size(); }
};

struct BinaryMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> values;  // exactly 0 or 1

  BinaryMask() = default;
  BinaryMask(int w, int h, std::uint8_t v = 0)
      : width(w), height(h), values(static_cast<std::size_t>(w) * h, v) {}

  std::uint8_t& at(int x, int y) { return values[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
  std::size_t count() const {
    std::size_t n = 0;
    for (auto v : values) n += v;
    return n;
  }
};

// Rec.601 luma on raw 8-bit values; one plane in [0,255].
PlanarImage to_grayscale(const RasterImage& img);

}  // namespace sal

#endif
