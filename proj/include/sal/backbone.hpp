#ifndef SAL_BACKBONE_HPP
#define SAL_BACKBONE_HPP

#include <array>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "sal/image.hpp"

namespace sal {

struct ConvSpec {
  int out_channels = 0;
  int kernel = 0;
  int stride = 1;
  int pad = 0;
  bool bias = true;
};
struct ReluSpec {};
struct MaxPoolSpec {
  int kernel = 0;
  int stride = 0;
};
struct FlattenSpec {};
struct FcSpec {
  int out_dim = 0;
  bool bias = true;
};

using LayerSpec = std::variant<ConvSpec, ReluSpec, MaxPoolSpec, FlattenSpec, FcSpec>;

// Convolutional feature extractor description: layer chain, input geometry
// and the per-channel mean subtracted before the forward pass.
struct BackboneSpec {
  std::vector<LayerSpec> layers;
  int input_side = 64;
  int feature_dim = 0;  // validated against the layer chain
  std::array<double, 3> mean_rgb{0.0, 0.0, 0.0};
};

struct Backbone {
  BackboneSpec spec;
  std::vector<std::vector<double>> weights;  // one blob per layer (empty for stateless)
  std::uint64_t seed = 0;

  int feature_dim() const { return spec.feature_dim; }
};

// Shape-checks the chain and returns the flattened output length.
int validate_spec(const BackboneSpec& spec);

// The default desk-scale backbone: two conv/pool stages and a projection to
// 64 features, with deterministically seeded weights.
Backbone make_desk_backbone(int input_side, std::uint64_t seed,
                            const std::array<double, 3>& mean_rgb);

// Forward pass; input must be input_side x input_side. Pixels are shifted by
// mean_rgb and scaled by 1/255 before the first layer.
std::vector<double> backbone_forward(const Backbone& net, const RasterImage& img);

void save_backbone(const Backbone& net, const std::string& path);
Backbone load_backbone(const std::string& path);

}  // namespace sal

#endif
