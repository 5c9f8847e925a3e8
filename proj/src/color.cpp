#include "sal/color.hpp"

#include <algorithm>
#include <cmath>

namespace sal {

namespace {

double srgb_decode(std::uint8_t v8) {
  double c = v8 / 255.0;
  return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

double lab_f(double t) {
  constexpr double kCube = (6.0 / 29.0) * (6.0 / 29.0) * (6.0 / 29.0);
  constexpr double kScale = 1.0 / (3.0 * (6.0 / 29.0) * (6.0 / 29.0));
  return t > kCube ? std::cbrt(t) : t * kScale + 4.0 / 29.0;
}

}  // namespace

void rgb_to_lab(std::uint8_t r8, std::uint8_t g8, std::uint8_t b8,
                double& L, double& a, double& bb) {
  double r = srgb_decode(r8), g = srgb_decode(g8), b = srgb_decode(b8);
  // sRGB -> XYZ, D65 white point.
  double x = 0.4124564 * r + 0.3575761 * g + 0.1804375 * b;
  double y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b;
  double z = 0.0193339 * r + 0.1191920 * g + 0.9503041 * b;
  double fx = lab_f(x / 0.95047);
  double fy = lab_f(y);
  double fz = lab_f(z / 1.08883);
  L = 116.0 * fy - 16.0;
  a = 500.0 * (fx - fy);
  bb = 200.0 * (fy - fz);
}

void rgb_to_hsv(std::uint8_t r8, std::uint8_t g8, std::uint8_t b8,
                double& h, double& s, double& v) {
  double r = r8 / 255.0, g = g8 / 255.0, b = b8 / 255.0;
  double mx = std::max({r, g, b});
  double mn = std::min({r, g, b});
  double d = mx - mn;
  v = mx;
  s = mx > 0.0 ? d / mx : 0.0;
  if (d <= 0.0) {
    h = 0.0;  // zero chroma
    return;
  }
  double h6;
  if (mx == r) {
    h6 = (g - b) / d;
    if (h6 < 0.0) h6 += 6.0;
  } else if (mx == g) {
    h6 = (b - r) / d + 2.0;
  } else {
    h6 = (r - g) / d + 4.0;
  }
  h = h6 / 6.0;
}

PlanarImage rgb_to_lab(const RasterImage& img) {
  PlanarImage out(img.width, img.height, 3);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      const auto* p = img.px(x, y);
      double L, a, b;
      rgb_to_lab(p[0], p[1], p[2], L, a, b);
      out.at(0, x, y) = L;
      out.at(1, x, y) = a;
      out.at(2, x, y) = b;
    }
  return out;
}

PlanarImage rgb_to_hsv(const RasterImage& img) {
  PlanarImage out(img.width, img.height, 3);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      const auto* p = img.px(x, y);
      double h, s, v;
      rgb_to_hsv(p[0], p[1], p[2], h, s, v);
      out.at(0, x, y) = h;
      out.at(1, x, y) = s;
      out.at(2, x, y) = v;
    }
  return out;
}

PlanarImage to_grayscale(const RasterImage& img) {
  PlanarImage out(img.width, img.height, 1);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      const auto* p = img.px(x, y);
      out.at(0, x, y) = 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2];
    }
  return out;
}

}  // namespace sal
