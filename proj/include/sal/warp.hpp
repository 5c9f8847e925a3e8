#ifndef SAL_WARP_HPP
#define SAL_WARP_HPP

#include "sal/image.hpp"

namespace sal {

// Anisotropic bilinear resample of the whole image to side x side. Aspect
// ratio is deliberately not preserved. side == width == height copies pixels.
RasterImage warp_to_square(const RasterImage& img, int side);

}  // namespace sal

#endif
