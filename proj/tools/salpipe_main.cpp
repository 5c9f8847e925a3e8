// Command-line front end: synth, segment, train, infer, eval, dataset-check.

#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "sal/pipeline.hpp"

namespace {

struct CommonFlags {
  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int jobs = -1;
  int levels = -1;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "JSON config file");
  cmd->add_option("--seed", flags.seed, "master RNG seed")
      ->each([&](const std::string&) { flags.seed_set = true; });
  cmd->add_option("--jobs", flags.jobs, "worker threads (0 = all cores)");
  cmd->add_option("--levels", flags.levels, "number of segmentation levels");
}

sal::PipelineConfig resolve_config(const CommonFlags& flags) {
  sal::PipelineConfig config;
  if (!flags.config_path.empty()) config = sal::load_config(flags.config_path);
  if (flags.seed_set) config.seed = flags.seed;
  if (flags.jobs >= 0) config.jobs = flags.jobs;
  if (flags.levels > 0) config.levels = flags.levels;
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Salient-object-detection pipeline"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
  int synth_n = 10;
  std::uint64_t synth_seed = 0;
  std::string synth_out;
  bool low_contrast = false;
  synth->add_option("--n", synth_n, "number of images")->required();
  synth->add_option("--seed", synth_seed, "generator seed");
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_flag("--low-contrast", low_contrast,
                  "narrow the foreground/background color gap");

  // segment
  auto* segment = app.add_subcommand("segment", "write the multi-level segmentation");
  CommonFlags segment_flags;
  std::string segment_image, segment_out;
  segment->add_option("image", segment_image, "input image")->required();
  segment->add_option("--out", segment_out, "output directory")->required();
  add_common(segment, segment_flags);

  // train
  auto* train = app.add_subcommand("train", "train the full model bundle");
  CommonFlags train_flags;
  std::string train_data, train_bundle, train_cache;
  train->add_option("--data", train_data, "dataset directory (images/ + gt/)")->required();
  train->add_option("--bundle", train_bundle, "output bundle directory")->required();
  train->add_option("--cache", train_cache, "segmentation cache directory");
  add_common(train, train_flags);

  // infer
  auto* infer = app.add_subcommand("infer", "run saliency inference");
  std::string infer_input, infer_bundle, infer_out, infer_model = "mdf";
  std::string infer_features;
  bool no_crf = false, save_levels = false;
  int infer_jobs = 0;
  infer->add_option("input", infer_input, "image file or dataset directory")->required();
  infer->add_option("--bundle", infer_bundle, "trained bundle directory")->required();
  infer->add_option("--out", infer_out, "output directory")->required();
  infer->add_option("--model", infer_model, "mdf or hdhf")
      ->check(CLI::IsMember({"mdf", "hdhf"}));
  infer->add_flag("--no-crf", no_crf, "skip CRF refinement");
  infer->add_flag("--save-levels", save_levels, "also write per-level maps");
  infer->add_option("--features", infer_features, "feature provider file");
  infer->add_option("--jobs", infer_jobs, "worker threads (0 = all cores)");

  // eval
  auto* eval = app.add_subcommand("eval", "score saliency maps against ground truth");
  std::string eval_maps, eval_gts, eval_out = "eval_";
  eval->add_option("--maps", eval_maps, "directory of saliency maps")->required();
  eval->add_option("--gt", eval_gts, "directory of ground-truth masks")->required();
  eval->add_option("--out", eval_out, "output prefix for report files");

  // dataset-check
  auto* check = app.add_subcommand("dataset-check", "annotation consistency tooling");
  std::string check_dir, check_out;
  double check_cutoff = 0.9;
  int check_radius = 15;
  check->add_option("--annotations", check_dir,
                    "directory with images/ and masks/<stem>.{1,2,3}.png")
      ->required();
  check->add_option("--out", check_out, "output directory")->required();
  check->add_option("--cutoff", check_cutoff, "consistency cutoff");
  check->add_option("--dilation", check_radius, "surrounding-ring radius in pixels");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth) {
      sal::SynthOptions options;
      options.count = synth_n;
      options.seed = synth_seed;
      options.low_contrast = low_contrast;
      auto stems = sal::synth_dataset(options, synth_out);
      std::cout << "wrote " << stems.size() << " images under " << synth_out << "\n";
    } else if (*segment) {
      sal::cmd_segment(segment_image, segment_out, resolve_config(segment_flags));
      std::cout << "wrote segmentation levels under " << segment_out << "\n";
    } else if (*train) {
      sal::PipelineConfig config = resolve_config(train_flags);
      sal::TrainReport report = sal::cmd_train(train_data, train_bundle, config, train_cache);
      std::cout << "trained on " << report.train_stems.size() << " images, "
                << report.sample_count << " samples; final loss "
                << report.mlp_epoch_losses.back() << "; forest OOB MAE "
                << report.forest_oob_mae << "\n";
      std::cout << "bundle written to " << train_bundle << "\n";
    } else if (*infer) {
      auto results = sal::cmd_infer(infer_input, infer_bundle, infer_out, infer_model,
                                    !no_crf, save_levels, infer_jobs, infer_features);
      std::cout << "wrote " << results.size() << " saliency maps under " << infer_out
                << "\n";
    } else if (*eval) {
      sal::EvalReport report = sal::cmd_eval(eval_maps, eval_gts, eval_out);
      std::cout << "images " << report.per_image.size() << " auc " << report.dataset_auc
                << " max_f " << report.dataset_max_f << " mae " << report.mean_mae << "\n";
    } else if (*check) {
      auto checks = sal::cmd_dataset_check(check_dir, check_out, check_cutoff, check_radius);
      int kept = 0;
      for (const auto& c : checks) kept += c.included ? 1 : 0;
      std::cout << "checked " << checks.size() << " images, kept " << kept << "\n";
    }
  } catch (const sal::Error& e) {
    nlohmann::json err = {{"code", e.code()}, {"message", e.what()}};
    std::cerr << "error: " << err.dump() << "\n";
    return 1;
  } catch (const std::exception& e) {
    nlohmann::json err = {{"code", "internal"}, {"message", e.what()}};
    std::cerr << "error: " << err.dump() << "\n";
    return 1;
  }
  return 0;
}
