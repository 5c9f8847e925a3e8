#include "sal/warp.hpp"

#include <algorithm>
#include <cmath>

namespace sal {

RasterImage warp_to_square(const RasterImage& img, int side) {
  require(!img.empty(), "empty_image", "cannot warp an empty image");
  require(side >= 1, "bad_side", "target side must be >= 1");
  RasterImage out(side, side);
  const double sx = static_cast<double>(img.width) / side;
  const double sy = static_cast<double>(img.height) / side;
  for (int y = 0; y < side; ++y) {
    // Center-aligned mapping: identity when side matches both dimensions.
    double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, img.height - 1.0);
    int y0 = static_cast<int>(fy);
    int y1 = std::min(y0 + 1, img.height - 1);
    double wy = fy - y0;
    for (int x = 0; x < side; ++x) {
      double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, img.width - 1.0);
      int x0 = static_cast<int>(fx);
      int x1 = std::min(x0 + 1, img.width - 1);
      double wx = fx - x0;
      const auto* p00 = img.px(x0, y0);
      const auto* p10 = img.px(x1, y0);
      const auto* p01 = img.px(x0, y1);
      const auto* p11 = img.px(x1, y1);
      auto* q = out.px(x, y);
      for (int c = 0; c < 3; ++c) {
        double v = (1 - wy) * ((1 - wx) * p00[c] + wx * p10[c]) +
                   wy * ((1 - wx) * p01[c] + wx * p11[c]);
        q[c] = static_cast<std::uint8_t>(std::lround(v));
      }
    }
  }
  return out;
}

}  // namespace sal
