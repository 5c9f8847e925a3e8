#ifndef SAL_LOWLEVEL_HPP
#define SAL_LOWLEVEL_HPP

#include <array>
#include <vector>

#include "sal/image.hpp"
#include "sal/segmentation.hpp"

namespace sal {

// Border-band pixels with low initial saliency; the background reference for
// all contrast features. Falls back to the whole band when the intersection
// with the low-saliency condition is empty.
struct PseudoBackground {
  BinaryMask mask;
  std::vector<int> pixels;  // linear indices, row-major
  bool fallback = false;
};

PseudoBackground pseudo_background(const SaliencyMap& init, int border = 30,
                                   double thresh = 0.1);

// L1-normalized histogram; all-zero when built from an empty pixel set.
struct Histogram {
  std::vector<double> bins;
};

enum class ColorSpace { Rgb, Lab, Hsv };

// Joint 3-D quantization with bins_per_channel^3 bins. Channel ranges:
// RGB [0,255], L [0,100], a/b [-128,127], HSV [0,1].
Histogram color_histogram(const std::vector<std::array<double, 3>>& pixels,
                          ColorSpace space, int bins_per_channel = 8);

// 0.5 * sum (h1-h2)^2/(h1+h2); zero-denominator terms contribute 0.
double chi_square(const Histogram& h1, const Histogram& h2);

// 48-filter Leung-Malik bank: 6 orientations x 3 scales x {edge, bar},
// 8 Gaussians, 4 LoG; 49x49 support; every filter zero-mean, L1-normalized.
struct LmFilterBank {
  static constexpr int kFilters = 48;
  static constexpr int kSupport = 49;
  std::vector<std::vector<double>> kernels;  // kFilters x kSupport^2
};

const LmFilterBank& lm_filter_bank();

// Per-pixel index of the filter with the largest absolute response
// (lowest index wins ties), computed with clamped borders.
std::vector<std::uint8_t> lm_argmax_map(const PlanarImage& gray, int jobs = 1);

// Basic 8-neighbor LBP codes, clockwise from the top-left neighbor
// (most significant bit first), bit set when neighbor >= center.
std::vector<std::uint8_t> lbp_code_map(const PlanarImage& gray);

Histogram histogram_of_indices(const std::vector<std::uint8_t>& index_map,
                               const std::vector<int>& pixels, int bin_count);

Histogram lm_max_response_histogram(const PlanarImage& gray, const std::vector<int>& pixels);
Histogram lbp_histogram(const PlanarImage& gray, const std::vector<int>& pixels);

// Everything the descriptor needs about one image, computed once and shared
// across segmentation levels.
struct ImageFeatures {
  int width = 0;
  int height = 0;
  const RasterImage* rgb = nullptr;
  PlanarImage lab;
  PlanarImage hsv;
  PlanarImage gray;
  std::vector<std::uint8_t> lm_index;
  std::vector<std::uint8_t> lbp_code;
};

ImageFeatures compute_image_features(const RasterImage& img, int jobs = 1);

// Mean/histogram summary of one pixel set in all three color spaces plus the
// two texture histograms. Used for the region R, the pseudo background B and
// the entire image I.
struct PixelSetStats {
  std::array<double, 3> mean_rgb{}, mean_lab{}, mean_hsv{};
  std::array<double, 3> var_rgb{}, var_lab{}, var_hsv{};
  Histogram h_rgb, h_lab, h_hsv, h_lm, h_lbp;
};

PixelSetStats pixel_set_stats(const ImageFeatures& feat, const std::vector<int>& pixels);

constexpr int kDescriptorDim = 39;

struct LowLevelDescriptor {
  std::array<double, kDescriptorDim> values{};  // c1..c28 then s1..s11
};

// Table-ordered 39-dim descriptor of region r against the pseudo background
// and the whole image.
LowLevelDescriptor descriptor(const ImageFeatures& feat, const Segmentation& seg, int r,
                              const PixelSetStats& background_stats,
                              const PixelSetStats& image_stats);

int region_perimeter(const Segmentation& seg, int r);

}  // namespace sal

#endif
