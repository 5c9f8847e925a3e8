#include "sal/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include <nlohmann/json.hpp>

#include "sal/crf.hpp"
#include "sal/lowlevel.hpp"
#include "sal/parallel.hpp"
#include "sal/png_io.hpp"
#include "sal/rng.hpp"

namespace fs = std::filesystem;

namespace sal {

std::vector<DatasetEntry> list_dataset(const std::string& dir, bool require_gt) {
  fs::path images = fs::path(dir) / "images";
  fs::path gts = fs::path(dir) / "gt";
  require(fs::is_directory(images), "missing_dir", "no images/ directory under " + dir);

  std::vector<DatasetEntry> entries;
  for (const auto& e : fs::directory_iterator(images)) {
    if (!e.is_regular_file() || e.path().extension() != ".png") continue;
    DatasetEntry entry;
    entry.stem = e.path().stem().string();
    entry.image_path = e.path().string();
    fs::path gt = gts / e.path().filename();
    if (fs::exists(gt))
      entry.gt_path = gt.string();
    else
      require(!require_gt, "missing_gt", "no ground truth for " + entry.stem);
    entries.push_back(std::move(entry));
  }
  require(!entries.empty(), "empty_dataset", "no PNG images under " + images.string());
  std::sort(entries.begin(), entries.end(),
            [](const auto& a, const auto& b) { return a.stem < b.stem; });
  return entries;
}

SplitIndices split_dataset(std::size_t count, const std::array<int, 3>& ratios) {
  int total = ratios[0] + ratios[1] + ratios[2];
  require(total > 0 && ratios[0] > 0, "bad_config", "split needs a positive train share");
  std::size_t train_end = static_cast<std::size_t>(
      std::llround(static_cast<double>(count) * ratios[0] / total));
  std::size_t val_end = static_cast<std::size_t>(
      std::llround(static_cast<double>(count) * (ratios[0] + ratios[1]) / total));
  train_end = std::clamp<std::size_t>(train_end, 1, count);
  val_end = std::clamp<std::size_t>(val_end, train_end, count);

  SplitIndices split;
  for (std::size_t i = 0; i < count; ++i) {
    if (i < train_end)
      split.train.push_back(i);
    else if (i < val_end)
      split.val.push_back(i);
    else
      split.test.push_back(i);
  }
  // Fusion fitting needs at least one validation image.
  if (split.val.empty()) {
    require(split.train.size() > 1, "empty_dataset",
            "need at least two images to form a validation split");
    split.val.push_back(split.train.back());
    split.train.pop_back();
  }
  return split;
}

std::vector<std::vector<RegionEval>> evaluate_regions(
    const RasterImage& img, const SegmentationStack& stack, const Backbone& net,
    const MlpModel& mlp, int jobs, const FeatureProvider* provider,
    const std::string& image_id) {
  std::vector<std::vector<RegionEval>> evals(stack.levels.size());
  std::vector<std::pair<int, int>> work;
  for (std::size_t l = 0; l < stack.levels.size(); ++l) {
    evals[l].resize(stack.levels[l].region_count());
    for (int r = 0; r < stack.levels[l].region_count(); ++r)
      work.emplace_back(static_cast<int>(l), r);
  }
  parallel_for(work.size(), jobs, [&](std::size_t i) {
    auto [l, r] = work[i];
    std::vector<double> features =
        provider ? provider->fetch(image_id, l + 1, r)
                 : s3cnn_extract(img, stack.levels[l], r, net);
    MlpOutput out = mlp_forward(mlp, features);
    evals[l][r] = RegionEval{out.score, std::move(out.dcf)};
  });
  return evals;
}

std::vector<SaliencyMap> score_maps(const SegmentationStack& stack,
                                    const std::vector<std::vector<RegionEval>>& evals) {
  std::vector<SaliencyMap> maps(stack.levels.size());
  for (std::size_t l = 0; l < stack.levels.size(); ++l) {
    const Segmentation& seg = stack.levels[l];
    SaliencyMap map(seg.width, seg.height);
    for (std::size_t p = 0; p < map.size(); ++p)
      map.values[p] = evals[l][seg.labels[p]].score;
    maps[l] = std::move(map);
  }
  return maps;
}

SaliencyMap mean_of_maps(const std::vector<SaliencyMap>& maps) {
  require(!maps.empty(), "empty_samples", "mean of zero maps");
  SaliencyMap out(maps[0].width, maps[0].height);
  for (const auto& m : maps)
    for (std::size_t p = 0; p < out.size(); ++p) out.values[p] += m.values[p];
  for (double& v : out.values) v /= static_cast<double>(maps.size());
  return out;
}

namespace {

// Everything retained per training image between the pipeline stages.
struct ImageRecord {
  std::string stem;
  RasterImage image;
  BinaryMask gt;
  SegmentationStack stack;
  std::vector<std::vector<RegionEval>> evals;                 // after MLP training
  std::vector<std::vector<LowLevelDescriptor>> descriptors;   // per level, per region
  std::vector<std::vector<std::pair<int, int>>> selected;     // purity-rule labels
};

SegmentationStack build_or_load_stack(const RasterImage& img, const std::string& stem,
                                      const PipelineConfig& config,
                                      const std::string& cache_dir) {
  const std::string tag =
      stem + ".M" + std::to_string(config.levels) + "." +
      std::to_string(config.finest_target) + "-" + std::to_string(config.coarsest_target);
  if (!cache_dir.empty()) {
    bool complete = true;
    for (int l = 1; l <= config.levels && complete; ++l)
      complete = fs::exists(fs::path(cache_dir) / (tag + ".L" + std::to_string(l) + ".png"));
    if (complete) {
      SegmentationStack stack;
      for (int l = 1; l <= config.levels; ++l)
        stack.levels.push_back(load_segmentation(
            (fs::path(cache_dir) / (tag + ".L" + std::to_string(l) + ".png")).string()));
      return stack;
    }
  }
  SegmentationStack stack = build_stack(img, config.levels, config.finest_target,
                                        config.coarsest_target, config.sigma, 1);
  if (!cache_dir.empty()) {
    fs::create_directories(cache_dir);
    for (const auto& seg : stack.levels)
      save_segmentation(seg, (fs::path(cache_dir) /
                              (tag + ".L" + std::to_string(seg.level) + ".png"))
                                 .string());
  }
  return stack;
}

void compute_descriptors(ImageRecord& rec, int jobs, const PipelineConfig& config) {
  SaliencyMap init = mean_of_maps(score_maps(rec.stack, rec.evals));
  PseudoBackground bg = pseudo_background(init, config.border, config.bg_thresh);
  ImageFeatures feat = compute_image_features(rec.image, jobs);
  PixelSetStats bg_stats = pixel_set_stats(feat, bg.pixels);
  std::vector<int> all_pixels(rec.image.pixel_count());
  for (std::size_t p = 0; p < all_pixels.size(); ++p) all_pixels[p] = static_cast<int>(p);
  PixelSetStats img_stats = pixel_set_stats(feat, all_pixels);

  rec.descriptors.resize(rec.stack.levels.size());
  for (std::size_t l = 0; l < rec.stack.levels.size(); ++l) {
    const Segmentation& seg = rec.stack.levels[l];
    rec.descriptors[l].resize(seg.region_count());
    for (int r = 0; r < seg.region_count(); ++r)
      rec.descriptors[l][r] = descriptor(feat, seg, r, bg_stats, img_stats);
  }
}

std::vector<SaliencyMap> hdhf_maps_for(const ImageRecord& rec, const ForestModel& forest) {
  std::vector<SaliencyMap> maps(rec.stack.levels.size());
  for (std::size_t l = 0; l < rec.stack.levels.size(); ++l) {
    const Segmentation& seg = rec.stack.levels[l];
    std::vector<double> scores(seg.region_count());
    for (int r = 0; r < seg.region_count(); ++r) {
      std::vector<double> hdhf =
          build_hdhf(rec.evals[l][r].dcf,
                     {rec.descriptors[l][r].values.begin(), rec.descriptors[l][r].values.end()});
      scores[r] = forest_predict(forest, hdhf);
    }
    SaliencyMap map(seg.width, seg.height);
    for (std::size_t p = 0; p < map.size(); ++p) map.values[p] = scores[seg.labels[p]];
    maps[l] = std::move(map);
  }
  return maps;
}

std::array<double, 3> corpus_mean_rgb(const std::vector<ImageRecord>& records) {
  double sum[3] = {0.0, 0.0, 0.0};
  double count = 0.0;
  for (const auto& rec : records) {
    for (std::size_t i = 0; i < rec.image.data.size(); i += 3)
      for (int c = 0; c < 3; ++c) sum[c] += rec.image.data[i + c];
    count += static_cast<double>(rec.image.pixel_count());
  }
  // Rounded so that masked pixels vanish exactly after mean subtraction.
  return {std::round(sum[0] / count), std::round(sum[1] / count),
          std::round(sum[2] / count)};
}

}  // namespace

TrainReport cmd_train(const std::string& data_dir, const std::string& bundle_dir,
                      const PipelineConfig& config, const std::string& cache_dir) {
  const int jobs = effective_jobs(config.jobs);
  auto entries = list_dataset(data_dir, true);
  SplitIndices split = split_dataset(entries.size(), config.split);

  TrainReport report;
  for (auto i : split.train) report.train_stems.push_back(entries[i].stem);
  for (auto i : split.val) report.val_stems.push_back(entries[i].stem);
  for (auto i : split.test) report.test_stems.push_back(entries[i].stem);

  // Stage 1: load, segment, and label regions for train + validation images.
  std::vector<std::size_t> used = split.train;
  used.insert(used.end(), split.val.begin(), split.val.end());
  std::vector<ImageRecord> records(used.size());
  parallel_for(used.size(), jobs, [&](std::size_t i) {
    ImageRecord& rec = records[i];
    rec.stem = entries[used[i]].stem;
    rec.image = load_image(entries[used[i]].image_path);
    rec.gt = load_mask(entries[used[i]].gt_path);
    require(rec.gt.width == rec.image.width && rec.gt.height == rec.image.height,
            "size_mismatch", "ground truth size mismatch for " + rec.stem);
    rec.stack = build_or_load_stack(rec.image, rec.stem, config, cache_dir);
    rec.selected.resize(rec.stack.levels.size());
    for (std::size_t l = 0; l < rec.stack.levels.size(); ++l)
      rec.selected[l] = select_samples(rec.stack.levels[l], rec.gt, config.purity);
  });

  const std::size_t n_train = split.train.size();
  ModelBundle bundle;
  bundle.config = config;
  bundle.crf = config.crf;
  bundle.backbone = make_desk_backbone(config.input_side, config.backbone_seed(),
                                       corpus_mean_rgb(records));

  // Stage 2: S-3CNN features for every selected training region.
  struct SampleRef {
    std::size_t image;
    int level;
    int region;
    int label;
  };
  std::vector<SampleRef> refs;
  for (std::size_t i = 0; i < n_train; ++i)
    for (std::size_t l = 0; l < records[i].stack.levels.size(); ++l)
      for (auto [r, label] : records[i].selected[l])
        refs.push_back({i, static_cast<int>(l), r, label});
  if (config.max_samples > 0 && refs.size() > static_cast<std::size_t>(config.max_samples)) {
    Rng rng(config.sample_seed());
    rng.shuffle(refs);
    refs.resize(config.max_samples);
    // Deterministic order for the training loop regardless of the cap.
    std::sort(refs.begin(), refs.end(), [](const SampleRef& a, const SampleRef& b) {
      return std::tie(a.image, a.level, a.region) < std::tie(b.image, b.level, b.region);
    });
  }
  require(!refs.empty(), "empty_samples", "the purity rule selected no training regions");

  std::vector<TrainingSample> samples(refs.size());
  parallel_for(refs.size(), jobs, [&](std::size_t i) {
    const SampleRef& ref = refs[i];
    const ImageRecord& rec = records[ref.image];
    samples[i].features =
        s3cnn_extract(rec.image, rec.stack.levels[ref.level], ref.region, bundle.backbone);
    samples[i].label = ref.label;
  });
  report.sample_count = samples.size();

  // Stage 3: train the MLP regressor.
  MlpTrainParams mlp_params;
  mlp_params.lr = config.lr;
  mlp_params.momentum = config.momentum;
  mlp_params.epochs = config.epochs;
  mlp_params.batch = config.batch;
  mlp_params.seed = config.mlp_seed();
  mlp_params.hidden1 = config.hidden;
  mlp_params.hidden2 = config.hidden;
  mlp_params.jobs = jobs;
  MlpTrainResult mlp_result = mlp_train(samples, mlp_params);
  bundle.mlp = std::move(mlp_result.model);
  report.mlp_epoch_losses = mlp_result.epoch_losses;
  for (const auto& w : mlp_result.warnings) std::cerr << "warning: " << w << "\n";

  // Stage 4: score all regions, derive descriptors and HDHF forest samples.
  parallel_for(records.size(), jobs, [&](std::size_t i) {
    records[i].evals =
        evaluate_regions(records[i].image, records[i].stack, bundle.backbone, bundle.mlp, 1);
    compute_descriptors(records[i], 1, config);
  });

  std::vector<std::vector<double>> forest_x(refs.size());
  std::vector<double> forest_y(refs.size());
  parallel_for(refs.size(), jobs, [&](std::size_t i) {
    const SampleRef& ref = refs[i];
    const ImageRecord& rec = records[ref.image];
    const auto& d = rec.descriptors[ref.level][ref.region].values;
    forest_x[i] = build_hdhf(rec.evals[ref.level][ref.region].dcf, {d.begin(), d.end()});
    forest_y[i] = ref.label;
  });

  ForestParams forest_params = config.forest;
  forest_params.seed = config.forest_seed();
  forest_params.jobs = jobs;
  ForestTrainResult forest_result = forest_train(forest_x, forest_y, forest_params);
  bundle.forest = std::move(forest_result.model);
  report.forest_oob_mae = forest_result.oob_mae;

  // Stage 5: fit the fusion weights on the validation split.
  std::vector<std::vector<SaliencyMap>> val_mdf, val_hdhf;
  std::vector<BinaryMask> val_gts;
  for (std::size_t i = n_train; i < records.size(); ++i) {
    val_mdf.push_back(score_maps(records[i].stack, records[i].evals));
    val_hdhf.push_back(hdhf_maps_for(records[i], bundle.forest));
    val_gts.push_back(records[i].gt);
  }
  bundle.fusion_mdf = fit_fusion(val_mdf, val_gts);
  bundle.fusion_hdhf = fit_fusion(val_hdhf, val_gts);

  // Stage 6: persist the bundle, the split and the training log.
  save_bundle(bundle, bundle_dir);
  {
    nlohmann::json split_json;
    split_json["train"] = report.train_stems;
    split_json["val"] = report.val_stems;
    split_json["test"] = report.test_stems;
    std::ofstream out(fs::path(bundle_dir) / "split.json");
    out << split_json.dump(2) << "\n";
    std::ofstream log(fs::path(bundle_dir) / "train_log.csv");
    log << "epoch,loss,lr\n";
    log << "0," << report.mlp_epoch_losses[0] << ",\n";
    for (std::size_t e = 1; e < report.mlp_epoch_losses.size(); ++e)
      log << e << "," << report.mlp_epoch_losses[e] << "," << bundle.mlp.lr_schedule[e - 1]
          << "\n";
  }
  report.bundle = std::move(bundle);
  return report;
}

InferResult infer_image(const RasterImage& img, const ModelBundle& bundle,
                        const std::string& model, bool use_crf, int jobs,
                        const FeatureProvider* provider, const std::string& image_id) {
  require(model == "mdf" || model == "hdhf", "bad_model",
          "model must be 'mdf' or 'hdhf'");
  const PipelineConfig& config = bundle.config;
  InferResult result;

  SegmentationStack stack = build_stack(img, config.levels, config.finest_target,
                                        config.coarsest_target, config.sigma, jobs);
  auto evals =
      evaluate_regions(img, stack, bundle.backbone, bundle.mlp, jobs, provider, image_id);
  std::vector<SaliencyMap> mdf_maps = score_maps(stack, evals);

  const FusionWeights* weights = &bundle.fusion_mdf;
  if (model == "hdhf") {
    ImageRecord rec;
    rec.image = img;
    rec.stack = std::move(stack);
    rec.evals = std::move(evals);
    compute_descriptors(rec, jobs, config);
    result.level_maps = hdhf_maps_for(rec, bundle.forest);
    weights = &bundle.fusion_hdhf;
  } else {
    result.level_maps = std::move(mdf_maps);
  }

  result.fused = fuse(result.level_maps, *weights);
  result.final = use_crf ? crf_refine(img, result.fused, bundle.crf, jobs) : result.fused;
  return result;
}

std::vector<InferResult> cmd_infer(const std::string& input_path,
                                   const std::string& bundle_dir,
                                   const std::string& out_dir, const std::string& model,
                                   bool use_crf, bool save_levels, int jobs,
                                   const std::string& provider_path) {
  ModelBundle bundle = load_bundle(bundle_dir);
  std::optional<FeatureProvider> provider;
  if (!provider_path.empty()) provider = FeatureProvider::load(provider_path);

  std::vector<DatasetEntry> entries;
  if (fs::is_directory(input_path)) {
    entries = list_dataset(input_path, false);
  } else {
    require(fs::exists(input_path), "unreadable_file", "no such image " + input_path);
    entries.push_back(
        {fs::path(input_path).stem().string(), input_path, std::string()});
  }
  fs::create_directories(out_dir);

  int eff_jobs = effective_jobs(jobs > 0 ? jobs : bundle.config.jobs);
  std::vector<InferResult> results(entries.size());
  // One image at a time; regions parallelize inside each stage.
  for (std::size_t i = 0; i < entries.size(); ++i) {
    RasterImage img = load_image(entries[i].image_path);
    results[i] = infer_image(img, bundle, model, use_crf, eff_jobs,
                             provider ? &*provider : nullptr, entries[i].stem);
    results[i].stem = entries[i].stem;
    save_map(results[i].final, (fs::path(out_dir) / (entries[i].stem + ".png")).string());
    save_map(results[i].fused,
             (fs::path(out_dir) / (entries[i].stem + ".fused.png")).string());
    if (save_levels)
      for (std::size_t l = 0; l < results[i].level_maps.size(); ++l)
        save_map(results[i].level_maps[l],
                 (fs::path(out_dir) /
                  (entries[i].stem + ".L" + std::to_string(l + 1) + ".png"))
                     .string());
  }
  return results;
}

EvalReport evaluate_maps(const std::vector<SaliencyMap>& maps,
                         const std::vector<BinaryMask>& gts,
                         const std::vector<std::string>& stems) {
  require(maps.size() == gts.size() && maps.size() == stems.size(), "size_mismatch",
          "maps, ground truths and names must align");
  EvalReport report;
  for (std::size_t i = 0; i < maps.size(); ++i) {
    PrCurve curve = pr_roc_single(maps[i], gts[i]);
    ImageMetrics m;
    m.stem = stems[i];
    m.auc = auc(curve);
    m.max_f = max_f(curve);
    m.adaptive = adaptive_prf(maps[i], gts[i]);
    m.mae = mae(maps[i], gts[i]);
    report.per_image.push_back(std::move(m));
  }
  report.dataset_curve = pr_roc(maps, gts);
  report.dataset_auc = auc(report.dataset_curve);
  report.dataset_max_f = max_f(report.dataset_curve);
  for (const auto& m : report.per_image) {
    report.mean_adaptive.precision += m.adaptive.precision;
    report.mean_adaptive.recall += m.adaptive.recall;
    report.mean_adaptive.f += m.adaptive.f;
    report.mean_mae += m.mae;
  }
  double inv = 1.0 / static_cast<double>(report.per_image.size());
  report.mean_adaptive.precision *= inv;
  report.mean_adaptive.recall *= inv;
  report.mean_adaptive.f *= inv;
  report.mean_mae *= inv;
  return report;
}

EvalReport cmd_eval(const std::string& maps_dir, const std::string& gts_dir,
                    const std::string& out_prefix) {
  std::map<std::string, std::string> gt_files;
  for (const auto& e : fs::directory_iterator(gts_dir))
    if (e.is_regular_file() && e.path().extension() == ".png")
      gt_files[e.path().stem().string()] = e.path().string();

  std::vector<SaliencyMap> maps;
  std::vector<BinaryMask> gts;
  std::vector<std::string> stems;
  for (const auto& e : fs::directory_iterator(maps_dir)) {
    if (!e.is_regular_file() || e.path().extension() != ".png") continue;
    std::string stem = e.path().stem().string();
    if (stem.find('.') != std::string::npos) continue;  // skip .fused / .L* extras
    auto it = gt_files.find(stem);
    require(it != gt_files.end(), "pairing_error", "no ground truth for map " + stem);
    maps.push_back(load_map(e.path().string()));
    gts.push_back(load_mask(it->second));
    stems.push_back(stem);
  }
  require(!maps.empty(), "empty_dataset", "no saliency maps under " + maps_dir);

  // Deterministic order.
  std::vector<std::size_t> order(maps.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return stems[a] < stems[b]; });
  std::vector<SaliencyMap> smaps;
  std::vector<BinaryMask> sgts;
  std::vector<std::string> sstems;
  for (auto i : order) {
    smaps.push_back(std::move(maps[i]));
    sgts.push_back(std::move(gts[i]));
    sstems.push_back(std::move(stems[i]));
  }
  EvalReport report = evaluate_maps(smaps, sgts, sstems);

  if (!out_prefix.empty()) {
    fs::path prefix(out_prefix);
    if (prefix.has_parent_path()) fs::create_directories(prefix.parent_path());
    std::ofstream csv(out_prefix + "report.csv");
    csv << "image,auc,max_f,adaptive_precision,adaptive_recall,adaptive_f,mae\n";
    for (const auto& m : report.per_image)
      csv << m.stem << "," << m.auc << "," << m.max_f << "," << m.adaptive.precision << ","
          << m.adaptive.recall << "," << m.adaptive.f << "," << m.mae << "\n";
    csv << "dataset," << report.dataset_auc << "," << report.dataset_max_f << ","
        << report.mean_adaptive.precision << "," << report.mean_adaptive.recall << ","
        << report.mean_adaptive.f << "," << report.mean_mae << "\n";

    nlohmann::json summary;
    summary["images"] = report.per_image.size();
    summary["auc"] = report.dataset_auc;
    summary["max_f"] = report.dataset_max_f;
    summary["adaptive"] = {{"precision", report.mean_adaptive.precision},
                           {"recall", report.mean_adaptive.recall},
                           {"f", report.mean_adaptive.f}};
    summary["mae"] = report.mean_mae;
    std::ofstream js(out_prefix + "summary.json");
    js << summary.dump(2) << "\n";

    std::ofstream pr(out_prefix + "pr_curve.csv");
    pr << "threshold,precision,recall\n";
    for (int t = 0; t < 256; ++t)
      pr << t << "," << report.dataset_curve.points[t].precision << ","
         << report.dataset_curve.points[t].recall << "\n";
    std::ofstream roc(out_prefix + "roc_curve.csv");
    roc << "threshold,fpr,tpr\n";
    for (int t = 0; t < 256; ++t)
      roc << t << "," << report.dataset_curve.points[t].fpr << ","
          << report.dataset_curve.points[t].tpr << "\n";
  }
  return report;
}

std::vector<AnnotationCheck> cmd_dataset_check(const std::string& annotation_dir,
                                               const std::string& out_dir,
                                               double consistency_cutoff,
                                               int dilation_radius) {
  fs::path images = fs::path(annotation_dir) / "images";
  fs::path masks = fs::path(annotation_dir) / "masks";
  require(fs::is_directory(images) && fs::is_directory(masks), "missing_dir",
          "annotation directory needs images/ and masks/");
  fs::create_directories(fs::path(out_dir) / "gt");

  std::vector<std::string> stems;
  for (const auto& e : fs::directory_iterator(images))
    if (e.is_regular_file() && e.path().extension() == ".png")
      stems.push_back(e.path().stem().string());
  std::sort(stems.begin(), stems.end());
  require(!stems.empty(), "empty_dataset", "no images under " + images.string());

  std::vector<AnnotationCheck> checks;
  std::ofstream csv(fs::path(out_dir) / "consistency.csv");
  csv << "image,consistency,included,min_chi_square,components,touches_boundary\n";
  std::ofstream excluded(fs::path(out_dir) / "excluded.txt");

  for (const auto& stem : stems) {
    std::vector<BinaryMask> annot;
    for (int p = 1; p <= 3; ++p) {
      fs::path mask = masks / (stem + "." + std::to_string(p) + ".png");
      require(fs::exists(mask), "missing_annotation",
              "missing annotator mask " + mask.string());
      annot.push_back(load_mask(mask.string()));
    }
    AnnotationCheck check;
    check.stem = stem;
    check.consistency = label_consistency(annot);
    check.included = check.consistency >= consistency_cutoff;

    BinaryMask gt = majority_gt(annot);
    RasterImage img = load_image((images / (stem + ".png")).string());
    if (gt.count() > 0) {
      ColorContrastReport contrast = color_contrast_criterion(img, gt, dilation_radius);
      check.min_chi_square = contrast.min_chi_square;
      check.component_count = contrast.component_count;
      check.touches_boundary = contrast.touches_boundary;
    }
    if (check.included)
      save_mask(gt, (fs::path(out_dir) / "gt" / (stem + ".png")).string());
    else
      excluded << stem << "\n";
    csv << stem << "," << check.consistency << "," << (check.included ? 1 : 0) << ","
        << check.min_chi_square << "," << check.component_count << ","
        << (check.touches_boundary ? 1 : 0) << "\n";
    checks.push_back(check);
  }
  return checks;
}

void cmd_segment(const std::string& image_path, const std::string& out_dir,
                 const PipelineConfig& config) {
  RasterImage img = load_image(image_path);
  SegmentationStack stack =
      build_stack(img, config.levels, config.finest_target, config.coarsest_target,
                  config.sigma, effective_jobs(config.jobs));
  fs::create_directories(out_dir);
  std::string stem = fs::path(image_path).stem().string();
  for (const auto& seg : stack.levels)
    save_segmentation(
        seg, (fs::path(out_dir) / (stem + ".L" + std::to_string(seg.level) + ".png")).string());
}

}  // namespace sal
