#ifndef SAL_PIPELINE_HPP
#define SAL_PIPELINE_HPP

#include <optional>
#include <string>
#include <vector>

#include "sal/bundle.hpp"
#include "sal/metrics.hpp"
#include "sal/synth.hpp"
#include "sal/windows.hpp"

namespace sal {

// A dataset directory holds images/<stem>.png and gt/<stem>.png.
struct DatasetEntry {
  std::string stem;
  std::string image_path;
  std::string gt_path;  // empty when no ground truth exists
};

std::vector<DatasetEntry> list_dataset(const std::string& dir, bool require_gt);

struct SplitIndices {
  std::vector<std::size_t> train, val, test;
};

SplitIndices split_dataset(std::size_t count, const std::array<int, 3>& ratios);

// Per-region MLP evaluation over a whole stack.
struct RegionEval {
  double score = 0.0;
  std::vector<double> dcf;
};

// When a feature provider is given, S-3CNN vectors come from it instead of
// the backbone (keys: image_id, level index starting at 1, region id).
std::vector<std::vector<RegionEval>> evaluate_regions(
    const RasterImage& img, const SegmentationStack& stack, const Backbone& net,
    const MlpModel& mlp, int jobs, const FeatureProvider* provider = nullptr,
    const std::string& image_id = "");

std::vector<SaliencyMap> score_maps(const SegmentationStack& stack,
                                    const std::vector<std::vector<RegionEval>>& evals);
SaliencyMap mean_of_maps(const std::vector<SaliencyMap>& maps);

struct TrainReport {
  ModelBundle bundle;
  std::vector<double> mlp_epoch_losses;
  double forest_oob_mae = 0.0;
  std::size_t sample_count = 0;
  std::vector<std::string> train_stems, val_stems, test_stems;
};

TrainReport cmd_train(const std::string& data_dir, const std::string& bundle_dir,
                      const PipelineConfig& config,
                      const std::string& cache_dir = "");

struct InferResult {
  std::string stem;
  std::vector<SaliencyMap> level_maps;
  SaliencyMap fused;
  SaliencyMap final;  // CRF-refined, or the fused map when the CRF is off
};

InferResult infer_image(const RasterImage& img, const ModelBundle& bundle,
                        const std::string& model, bool use_crf, int jobs,
                        const FeatureProvider* provider = nullptr,
                        const std::string& image_id = "");

// Runs inference for one image file or every image of a dataset directory;
// writes <stem>.png (final) and <stem>.fused.png, plus per-level maps when
// save_levels is set. Returns the written results.
std::vector<InferResult> cmd_infer(const std::string& input_path,
                                   const std::string& bundle_dir,
                                   const std::string& out_dir, const std::string& model,
                                   bool use_crf, bool save_levels, int jobs,
                                   const std::string& provider_path = "");

struct ImageMetrics {
  std::string stem;
  double auc = 0.0;
  double max_f = 0.0;
  AdaptivePrf adaptive;
  double mae = 0.0;
};

struct EvalReport {
  std::vector<ImageMetrics> per_image;
  PrCurve dataset_curve;
  double dataset_auc = 0.0;
  double dataset_max_f = 0.0;
  AdaptivePrf mean_adaptive;
  double mean_mae = 0.0;
};

EvalReport evaluate_maps(const std::vector<SaliencyMap>& maps,
                         const std::vector<BinaryMask>& gts,
                         const std::vector<std::string>& stems);
EvalReport cmd_eval(const std::string& maps_dir, const std::string& gts_dir,
                    const std::string& out_prefix);

struct AnnotationCheck {
  std::string stem;
  double consistency = 0.0;
  bool included = false;
  double min_chi_square = 0.0;
  int component_count = 0;
  bool touches_boundary = false;
};

// Annotation directory layout: images/<stem>.png and masks/<stem>.{1,2,3}.png.
// Majority ground truth is written for images with consistency >= 0.9.
std::vector<AnnotationCheck> cmd_dataset_check(const std::string& annotation_dir,
                                               const std::string& out_dir,
                                               double consistency_cutoff = 0.9,
                                               int dilation_radius = 15);

void cmd_segment(const std::string& image_path, const std::string& out_dir,
                 const PipelineConfig& config);

}  // namespace sal

#endif
