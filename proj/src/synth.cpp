#include "sal/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "sal/png_io.hpp"
#include "sal/rng.hpp"

namespace sal {

namespace {

std::array<int, 3> random_color(Rng& rng) {
  return {rng.range(0, 255), rng.range(0, 255), rng.range(0, 255)};
}

// A color a controlled distance away from base: large gaps give the default
// easy contrast, small gaps exercise the low-contrast selection criterion.
std::array<int, 3> offset_color(Rng& rng, const std::array<int, 3>& base, int gap) {
  std::array<int, 3> out;
  for (int c = 0; c < 3; ++c) {
    int sign = rng.uniform01() < 0.5 ? -1 : 1;
    int v = base[c] + sign * gap + rng.range(-gap / 4, gap / 4);
    if (v < 0 || v > 255) v = base[c] - sign * gap;
    out[c] = std::clamp(v, 0, 255);
  }
  return out;
}

struct Shape {
  bool ellipse = false;
  int cx = 0, cy = 0, rx = 0, ry = 0;  // rectangle half-extents or ellipse radii
  bool contains(int x, int y) const {
    if (!ellipse) return std::abs(x - cx) <= rx && std::abs(y - cy) <= ry;
    double fx = static_cast<double>(x - cx) / rx;
    double fy = static_cast<double>(y - cy) / ry;
    return fx * fx + fy * fy <= 1.0;
  }
};

}  // namespace

SynthSample synth_image(std::uint64_t seed, int side, bool low_contrast) {
  Rng rng(seed);
  const int noise = 18;
  const int gap = low_contrast ? 14 : 110;

  std::array<int, 3> bg = random_color(rng);
  std::array<int, 3> fg = offset_color(rng, bg, gap);

  SynthSample sample;
  for (int attempt = 0; attempt < 100; ++attempt) {
    int shape_count = rng.uniform01() < 0.5 ? 1 : 2;
    const int max_dim = std::min(45, side - 8);  // keep placements feasible
    std::vector<Shape> shapes;
    for (int s = 0; s < shape_count; ++s) {
      Shape sh;
      sh.ellipse = rng.uniform01() < 0.5;
      int wdim = rng.range(15, max_dim);
      int hdim = rng.range(15, max_dim);
      sh.rx = std::max(1, wdim / 2);
      sh.ry = std::max(1, hdim / 2);
      sh.cx = rng.range(sh.rx + 2, side - sh.rx - 3);
      sh.cy = rng.range(sh.ry + 2, side - sh.ry - 3);
      shapes.push_back(sh);
    }
    BinaryMask gt(side, side, 0);
    for (int y = 0; y < side; ++y)
      for (int x = 0; x < side; ++x)
        for (const auto& sh : shapes)
          if (sh.contains(x, y)) {
            gt.at(x, y) = 1;
            break;
          }
    double fraction = static_cast<double>(gt.count()) / (side * side);
    if (fraction < 0.02 || fraction > 0.60) continue;

    RasterImage img(side, side);
    for (int y = 0; y < side; ++y)
      for (int x = 0; x < side; ++x) {
        const auto& base = gt.at(x, y) ? fg : bg;
        std::uint8_t px[3];
        for (int c = 0; c < 3; ++c)
          px[c] = static_cast<std::uint8_t>(
              std::clamp(base[c] + rng.range(-noise, noise), 0, 255));
        img.set(x, y, px[0], px[1], px[2]);
      }
    sample.image = std::move(img);
    sample.gt = std::move(gt);
    return sample;
  }
  throw Error("synth_failed", "could not place shapes within the area constraints");
}

std::vector<std::string> synth_dataset(const SynthOptions& options,
                                       const std::string& out_dir) {
  require(options.count >= 1, "bad_param", "dataset size must be >= 1");
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(out_dir) / "images");
  fs::create_directories(fs::path(out_dir) / "gt");

  std::vector<std::string> stems;
  for (int i = 0; i < options.count; ++i) {
    SynthSample sample =
        synth_image(Rng::mix(options.seed, static_cast<std::uint64_t>(i)), options.side,
                    options.low_contrast);
    char stem[32];
    std::snprintf(stem, sizeof(stem), "synth_%04d", i);
    save_image(sample.image, (fs::path(out_dir) / "images" / (std::string(stem) + ".png")).string());
    save_mask(sample.gt, (fs::path(out_dir) / "gt" / (std::string(stem) + ".png")).string());
    stems.push_back(stem);
  }
  return stems;
}

}  // namespace sal
