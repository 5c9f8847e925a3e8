#ifndef SAL_COLOR_HPP
#define SAL_COLOR_HPP

#include "sal/image.hpp"

namespace sal {

// CIE L*a*b* under D65, sRGB gamma decoding applied. L in [0,100].
PlanarImage rgb_to_lab(const RasterImage& img);

// Hexcone HSV with all three channels scaled to [0,1]. Gray pixels get H=0.
PlanarImage rgb_to_hsv(const RasterImage& img);

void rgb_to_lab(std::uint8_t r, std::uint8_t g, std::uint8_t b,
                double& L, double& a, double& bb);
void rgb_to_hsv(std::uint8_t r, std::uint8_t g, std::uint8_t b,
                double& h, double& s, double& v);

}  // namespace sal

#endif
