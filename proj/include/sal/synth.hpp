#ifndef SAL_SYNTH_HPP
#define SAL_SYNTH_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "sal/image.hpp"

namespace sal {

struct SynthOptions {
  int count = 10;
  std::uint64_t seed = 0;
  int side = 96;
  bool low_contrast = false;  // narrow the foreground/background color gap
};

struct SynthSample {
  RasterImage image;
  BinaryMask gt;
};

// One 96x96 scene: noise-textured background with one or two salient
// rectangles/ellipses (15-45 px), salient fraction kept inside [2%, 60%].
SynthSample synth_image(std::uint64_t seed, int side = 96, bool low_contrast = false);

// Writes <dir>/images/synth_NNNN.png and <dir>/gt/synth_NNNN.png.
std::vector<std::string> synth_dataset(const SynthOptions& options,
                                       const std::string& out_dir);

}  // namespace sal

#endif
