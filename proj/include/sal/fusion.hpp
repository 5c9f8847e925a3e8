#ifndef SAL_FUSION_HPP
#define SAL_FUSION_HPP

#include <vector>

#include "sal/image.hpp"

namespace sal {

struct FusionWeights {
  std::vector<double> alphas;
  double residual = 0.0;  // ridge-regularized residual of the fit
};

// Least-squares weights for combining per-level maps into one map, fitted by
// normal equations over every pixel of every validation image. A ridge term
// of 1e-8 keeps the system well conditioned; weights are unconstrained.
FusionWeights fit_fusion(const std::vector<std::vector<SaliencyMap>>& level_maps,
                         const std::vector<BinaryMask>& gts);

// Pixelwise weighted sum of the level maps, clamped to [0,1].
SaliencyMap fuse(const std::vector<SaliencyMap>& level_maps, const FusionWeights& weights);

constexpr double kFusionRidge = 1e-8;

}  // namespace sal

#endif
