#ifndef SAL_METRICS_HPP
#define SAL_METRICS_HPP

#include <array>
#include <vector>

#include "sal/image.hpp"

namespace sal {

struct PrPoint {
  double precision = 1.0;
  double recall = 1.0;
  double tpr = 1.0;
  double fpr = 0.0;
};

// One point per threshold t = 0..255; a pixel counts as salient when
// round(v*255) >= t. Precision is 1 by convention when nothing is predicted;
// recall is 1 when the ground truth is empty.
struct PrCurve {
  std::array<PrPoint, 256> points;
};

PrCurve pr_roc_single(const SaliencyMap& map, const BinaryMask& gt);
// Dataset curve: precision/recall/tpr/fpr averaged per threshold.
PrCurve pr_roc(const std::vector<SaliencyMap>& maps, const std::vector<BinaryMask>& gts);

// Trapezoidal area under (fpr, tpr) with (0,0) and (1,1) appended.
double auc(const PrCurve& curve);

// Max over thresholds of (1+b^2)PR/(b^2 P+R); 0 where both P and R are 0.
double max_f(const PrCurve& curve, double beta2 = 0.3);

struct AdaptivePrf {
  double precision = 0.0;
  double recall = 0.0;
  double f = 0.0;
  double threshold = 0.0;
};

// Binarization at twice the mean saliency (clamped to 1).
AdaptivePrf adaptive_prf(const SaliencyMap& map, const BinaryMask& gt, double beta2 = 0.3);

double mae(const SaliencyMap& map, const BinaryMask& gt);

// Intersection over union of the annotators' masks; 1 when the union is empty.
double label_consistency(const std::vector<BinaryMask>& masks);

// Pixelwise majority vote of exactly three annotators.
BinaryMask majority_gt(const std::vector<BinaryMask>& masks);

struct ColorContrastReport {
  double min_chi_square = 0.0;  // over connected salient components
  int component_count = 0;
  bool touches_boundary = false;
};

// Selection measure: chi-square distance between each salient component's RGB
// histogram and its dilation ring (radius in pixels), minimized over
// components. Component count and boundary contact come along as
// informational outputs.
ColorContrastReport color_contrast_criterion(const RasterImage& img, const BinaryMask& gt,
                                             int dilation_radius = 15);

}  // namespace sal

#endif
