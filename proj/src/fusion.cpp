#include "sal/fusion.hpp"

#include <algorithm>
#include <cmath>

namespace sal {

namespace {

// Cholesky solve of the (symmetric positive definite) normal equations.
std::vector<double> solve_spd(std::vector<double> a, std::vector<double> b) {
  const int m = static_cast<int>(b.size());
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j <= i; ++j) {
      double s = a[i * m + j];
      for (int k = 0; k < j; ++k) s -= a[i * m + k] * a[j * m + k];
      if (i == j) {
        require(s > 0.0, "singular_system", "normal equations are not positive definite");
        a[i * m + j] = std::sqrt(s);
      } else {
        a[i * m + j] = s / a[j * m + j];
      }
    }
  }
  for (int i = 0; i < m; ++i) {
    for (int k = 0; k < i; ++k) b[i] -= a[i * m + k] * b[k];
    b[i] /= a[i * m + i];
  }
  for (int i = m - 1; i >= 0; --i) {
    for (int k = i + 1; k < m; ++k) b[i] -= a[k * m + i] * b[k];
    b[i] /= a[i * m + i];
  }
  return b;
}

}  // namespace

FusionWeights fit_fusion(const std::vector<std::vector<SaliencyMap>>& level_maps,
                         const std::vector<BinaryMask>& gts) {
  require(!level_maps.empty(), "empty_samples", "fusion fit needs validation images");
  require(level_maps.size() == gts.size(), "size_mismatch",
          "map and ground-truth counts differ");
  const int m = static_cast<int>(level_maps[0].size());
  require(m >= 1, "empty_samples", "fusion fit needs at least one level");

  // Accumulate G^T G, G^T y and y^T y streaming over all pixels.
  std::vector<double> gtg(static_cast<std::size_t>(m) * m, 0.0);
  std::vector<double> gty(m, 0.0);
  double yty = 0.0;
  double design_mass = 0.0;

  for (std::size_t i = 0; i < level_maps.size(); ++i) {
    const auto& maps = level_maps[i];
    require(static_cast<int>(maps.size()) == m, "size_mismatch",
            "inconsistent level count across images");
    const auto& gt = gts[i];
    for (int k = 0; k < m; ++k)
      require(maps[k].width == gt.width && maps[k].height == gt.height, "size_mismatch",
              "map and ground truth must share dimensions");
    const std::size_t npx = gt.values.size();
    for (std::size_t p = 0; p < npx; ++p) {
      double y = gt.values[p];
      for (int k = 0; k < m; ++k) {
        double vk = maps[k].values[p];
        design_mass += std::fabs(vk);
        gty[k] += vk * y;
        for (int l = 0; l <= k; ++l) gtg[k * m + l] += vk * maps[l].values[p];
      }
      yty += y * y;
    }
  }
  require(design_mass > 0.0, "zero_design", "all level maps are identically zero");

  for (int k = 0; k < m; ++k) {
    for (int l = k + 1; l < m; ++l) gtg[k * m + l] = gtg[l * m + k];
    gtg[k * m + k] += kFusionRidge;
  }

  FusionWeights w;
  w.alphas = solve_spd(gtg, gty);
  // Regularized residual ||y - G a||^2 + ridge ||a||^2 = y'y - 2 a'b + a'(A+rI)a.
  double quad = 0.0, cross = 0.0;
  for (int k = 0; k < m; ++k) {
    cross += w.alphas[k] * gty[k];
    for (int l = 0; l < m; ++l) quad += w.alphas[k] * gtg[k * m + l] * w.alphas[l];
  }
  w.residual = yty - 2.0 * cross + quad;
  return w;
}

SaliencyMap fuse(const std::vector<SaliencyMap>& level_maps, const FusionWeights& weights) {
  require(!level_maps.empty(), "empty_samples", "fuse needs at least one map");
  require(level_maps.size() == weights.alphas.size(), "size_mismatch",
          "weight count does not match level count");
  SaliencyMap out(level_maps[0].width, level_maps[0].height);
  for (const auto& map : level_maps)
    require(map.width == out.width && map.height == out.height, "size_mismatch",
            "level maps must share dimensions");
  for (std::size_t p = 0; p < out.size(); ++p) {
    double v = 0.0;
    for (std::size_t k = 0; k < level_maps.size(); ++k)
      v += weights.alphas[k] * level_maps[k].values[p];
    out.values[p] = std::clamp(v, 0.0, 1.0);
  }
  return out;
}

}  // namespace sal
