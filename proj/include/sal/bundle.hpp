#ifndef SAL_BUNDLE_HPP
#define SAL_BUNDLE_HPP

#include <array>
#include <cstdint>
#include <string>

#include "sal/backbone.hpp"
#include "sal/crf.hpp"
#include "sal/forest.hpp"
#include "sal/fusion.hpp"
#include "sal/mlp.hpp"

namespace sal {

// Every knob of the pipeline with its documented default. A JSON config file
// carries the same field names; CLI flags override individual fields.
struct PipelineConfig {
  std::uint64_t seed = 1;
  int levels = 15;
  int finest_target = 300;
  int coarsest_target = 20;
  double sigma = 0.8;
  double purity = 0.7;
  int input_side = 64;
  int border = 30;
  double bg_thresh = 0.1;
  double lr = 0.2;
  double momentum = 0.5;
  int epochs = 100;
  int batch = 64;
  int hidden = 300;
  int max_samples = 0;  // 0 keeps every selected region as a training sample
  ForestParams forest;
  CrfParams crf;
  std::array<int, 3> split{5, 1, 4};  // train : validation : test
  int jobs = 0;

  std::uint64_t backbone_seed() const;
  std::uint64_t mlp_seed() const;
  std::uint64_t forest_seed() const;
  std::uint64_t sample_seed() const;
};

PipelineConfig load_config(const std::string& path);
void save_config(const PipelineConfig& config, const std::string& path);
std::string config_to_json_text(const PipelineConfig& config);
PipelineConfig config_from_json_text(const std::string& text);

// The trained artifact set: backbone + MLP + forest files referenced from
// bundle.json, plus fusion weights and CRF parameters inline. Checksums of
// the referenced files are verified at load.
struct ModelBundle {
  int format_version = 1;
  PipelineConfig config;
  Backbone backbone;
  MlpModel mlp;
  ForestModel forest;
  FusionWeights fusion_mdf;
  FusionWeights fusion_hdhf;
  CrfParams crf;
};

void save_bundle(const ModelBundle& bundle, const std::string& dir);
ModelBundle load_bundle(const std::string& dir);

std::uint64_t fnv1a64_file(const std::string& path);

}  // namespace sal

#endif
