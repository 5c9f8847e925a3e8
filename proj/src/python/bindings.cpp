// Python bindings over the core pipeline: images, segmentation, CRF,
// fusion, metrics, the synthetic generator and the train/infer/eval drivers.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>

#include "sal/color.hpp"
#include "sal/crf.hpp"
#include "sal/fusion.hpp"
#include "sal/lowlevel.hpp"
#include "sal/metrics.hpp"
#include "sal/pipeline.hpp"
#include "sal/png_io.hpp"
#include "sal/segmentation.hpp"
#include "sal/synth.hpp"
#include "sal/warp.hpp"

namespace py = pybind11;
using namespace sal;

namespace {

using U8Array = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;
using F64Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

RasterImage to_image(const U8Array& arr) {
  require(arr.ndim() == 3 && arr.shape(2) == 3, "bad_array",
          "expected an (H, W, 3) uint8 array");
  RasterImage img(static_cast<int>(arr.shape(1)), static_cast<int>(arr.shape(0)));
  std::memcpy(img.data.data(), arr.data(), img.data.size());
  return img;
}

py::array from_image(const RasterImage& img) {
  py::array_t<std::uint8_t> arr({img.height, img.width, 3});
  std::memcpy(arr.mutable_data(), img.data.data(), img.data.size());
  return arr;
}

SaliencyMap to_map(const F64Array& arr) {
  require(arr.ndim() == 2, "bad_array", "expected an (H, W) float array");
  SaliencyMap map(static_cast<int>(arr.shape(1)), static_cast<int>(arr.shape(0)));
  std::memcpy(map.values.data(), arr.data(), map.size() * sizeof(double));
  return map;
}

py::array from_map(const SaliencyMap& map) {
  py::array_t<double> arr({map.height, map.width});
  std::memcpy(arr.mutable_data(), map.values.data(), map.size() * sizeof(double));
  return arr;
}

BinaryMask to_mask(const U8Array& arr) {
  require(arr.ndim() == 2, "bad_array", "expected an (H, W) uint8 array");
  BinaryMask mask(static_cast<int>(arr.shape(1)), static_cast<int>(arr.shape(0)));
  const std::uint8_t* src = arr.data();
  for (std::size_t i = 0; i < mask.values.size(); ++i) mask.values[i] = src[i] ? 1 : 0;
  return mask;
}

py::array from_mask(const BinaryMask& mask) {
  py::array_t<std::uint8_t> arr({mask.height, mask.width});
  std::memcpy(arr.mutable_data(), mask.values.data(), mask.values.size());
  return arr;
}

py::array from_planes(const PlanarImage& planes) {
  py::array_t<double> arr({planes.height, planes.width, planes.channels});
  auto view = arr.mutable_unchecked<3>();
  for (int c = 0; c < planes.channels; ++c)
    for (int y = 0; y < planes.height; ++y)
      for (int x = 0; x < planes.width; ++x) view(y, x, c) = planes.at(c, x, y);
  return arr;
}

py::array labels_array(const Segmentation& seg) {
  py::array_t<std::int32_t> arr({seg.height, seg.width});
  auto view = arr.mutable_unchecked<2>();
  for (int y = 0; y < seg.height; ++y)
    for (int x = 0; x < seg.width; ++x)
      view(y, x) = seg.labels[static_cast<std::size_t>(y) * seg.width + x];
  return arr;
}

Histogram to_histogram(const F64Array& arr) {
  require(arr.ndim() == 1, "bad_array", "expected a 1-d histogram array");
  Histogram h;
  h.bins.assign(arr.data(), arr.data() + arr.shape(0));
  return h;
}

CrfParams crf_params(double w1, double w2, double sigma_alpha, double sigma_beta,
                     double sigma_gamma, int iterations) {
  CrfParams params;
  params.w1 = w1;
  params.w2 = w2;
  params.sigma_alpha = sigma_alpha;
  params.sigma_beta = sigma_beta;
  params.sigma_gamma = sigma_gamma;
  params.iterations = iterations;
  return params;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Salient-object-detection pipeline core";
  m.attr("__version__") = "0.1.0";

  py::register_exception<Error>(m, "PipelineError");

  // imaging
  m.def("load_image", [](const std::string& path) { return from_image(load_image(path)); },
        py::arg("path"));
  m.def("save_image",
        [](const U8Array& img, const std::string& path) { save_image(to_image(img), path); },
        py::arg("image"), py::arg("path"));
  m.def("load_map", [](const std::string& path) { return from_map(load_map(path)); },
        py::arg("path"));
  m.def("save_map",
        [](const F64Array& map, const std::string& path) { save_map(to_map(map), path); },
        py::arg("map"), py::arg("path"));
  m.def("load_mask", [](const std::string& path) { return from_mask(load_mask(path)); },
        py::arg("path"));
  m.def("save_mask",
        [](const U8Array& mask, const std::string& path) { save_mask(to_mask(mask), path); },
        py::arg("mask"), py::arg("path"));
  m.def("rgb_to_lab",
        [](const U8Array& img) { return from_planes(rgb_to_lab(to_image(img))); },
        py::arg("image"));
  m.def("rgb_to_hsv",
        [](const U8Array& img) { return from_planes(rgb_to_hsv(to_image(img))); },
        py::arg("image"));
  m.def("warp_to_square",
        [](const U8Array& img, int side) {
          return from_image(warp_to_square(to_image(img), side));
        },
        py::arg("image"), py::arg("side"));

  // segmentation
  m.def("graph_segment",
        [](const U8Array& img, double k, int min_size, double sigma) {
          Segmentation seg = graph_segment(to_image(img), k, min_size, sigma);
          return labels_array(seg);
        },
        py::arg("image"), py::arg("k"), py::arg("min_size"), py::arg("sigma") = 0.8);
  m.def("build_stack",
        [](const U8Array& img, int levels, int finest, int coarsest, double sigma,
           int jobs) {
          SegmentationStack stack =
              build_stack(to_image(img), levels, finest, coarsest, sigma, jobs);
          py::list out;
          for (const auto& seg : stack.levels) out.append(labels_array(seg));
          return out;
        },
        py::arg("image"), py::arg("levels") = 15, py::arg("finest_target") = 300,
        py::arg("coarsest_target") = 20, py::arg("sigma") = 0.8, py::arg("jobs") = 1);

  // handcrafted features
  m.def("chi_square",
        [](const F64Array& h1, const F64Array& h2) {
          return chi_square(to_histogram(h1), to_histogram(h2));
        },
        py::arg("h1"), py::arg("h2"));

  // fusion and CRF
  m.def("fit_fusion",
        [](const std::vector<std::vector<F64Array>>& level_maps,
           const std::vector<U8Array>& gts) {
          std::vector<std::vector<SaliencyMap>> maps;
          for (const auto& image_maps : level_maps) {
            std::vector<SaliencyMap> one;
            for (const auto& arr : image_maps) one.push_back(to_map(arr));
            maps.push_back(std::move(one));
          }
          std::vector<BinaryMask> masks;
          for (const auto& arr : gts) masks.push_back(to_mask(arr));
          FusionWeights w = fit_fusion(maps, masks);
          return py::make_tuple(w.alphas, w.residual);
        },
        py::arg("level_maps"), py::arg("gts"));
  m.def("fuse",
        [](const std::vector<F64Array>& maps, const std::vector<double>& alphas) {
          std::vector<SaliencyMap> ms;
          for (const auto& arr : maps) ms.push_back(to_map(arr));
          FusionWeights w;
          w.alphas = alphas;
          return from_map(fuse(ms, w));
        },
        py::arg("maps"), py::arg("alphas"));
  m.def("crf_refine",
        [](const U8Array& img, const F64Array& init, double w1, double w2,
           double sigma_alpha, double sigma_beta, double sigma_gamma, int iterations,
           int jobs) {
          return from_map(crf_refine(to_image(img), to_map(init),
                                     crf_params(w1, w2, sigma_alpha, sigma_beta,
                                                sigma_gamma, iterations),
                                     jobs));
        },
        py::arg("image"), py::arg("init"), py::arg("w1") = 3.0, py::arg("w2") = 5.0,
        py::arg("sigma_alpha") = 3.0, py::arg("sigma_beta") = 50.0,
        py::arg("sigma_gamma") = 3.0, py::arg("iterations") = 10, py::arg("jobs") = 1);

  // metrics
  m.def("pr_roc",
        [](const F64Array& map, const U8Array& gt) {
          PrCurve curve = pr_roc_single(to_map(map), to_mask(gt));
          py::array_t<double> arr({256, 4});
          auto view = arr.mutable_unchecked<2>();
          for (int t = 0; t < 256; ++t) {
            view(t, 0) = curve.points[t].precision;
            view(t, 1) = curve.points[t].recall;
            view(t, 2) = curve.points[t].tpr;
            view(t, 3) = curve.points[t].fpr;
          }
          return arr;
        },
        py::arg("map"), py::arg("gt"),
        "per-threshold (precision, recall, tpr, fpr) rows for t = 0..255");
  m.def("auc",
        [](const F64Array& map, const U8Array& gt) {
          return auc(pr_roc_single(to_map(map), to_mask(gt)));
        },
        py::arg("map"), py::arg("gt"));
  m.def("max_f",
        [](const F64Array& map, const U8Array& gt, double beta2) {
          return max_f(pr_roc_single(to_map(map), to_mask(gt)), beta2);
        },
        py::arg("map"), py::arg("gt"), py::arg("beta2") = 0.3);
  m.def("adaptive_prf",
        [](const F64Array& map, const U8Array& gt) {
          AdaptivePrf a = adaptive_prf(to_map(map), to_mask(gt));
          return py::make_tuple(a.precision, a.recall, a.f);
        },
        py::arg("map"), py::arg("gt"));
  m.def("mae",
        [](const F64Array& map, const U8Array& gt) { return mae(to_map(map), to_mask(gt)); },
        py::arg("map"), py::arg("gt"));
  m.def("label_consistency",
        [](const std::vector<U8Array>& masks) {
          std::vector<BinaryMask> ms;
          for (const auto& arr : masks) ms.push_back(to_mask(arr));
          return label_consistency(ms);
        },
        py::arg("masks"));
  m.def("majority_gt",
        [](const std::vector<U8Array>& masks) {
          std::vector<BinaryMask> ms;
          for (const auto& arr : masks) ms.push_back(to_mask(arr));
          return from_mask(majority_gt(ms));
        },
        py::arg("masks"));
  m.def("color_contrast",
        [](const U8Array& img, const U8Array& gt, int dilation_radius) {
          ColorContrastReport r =
              color_contrast_criterion(to_image(img), to_mask(gt), dilation_radius);
          py::dict out;
          out["min_chi_square"] = r.min_chi_square;
          out["components"] = r.component_count;
          out["touches_boundary"] = r.touches_boundary;
          return out;
        },
        py::arg("image"), py::arg("gt"), py::arg("dilation_radius") = 15);

  // synthetic data
  m.def("synth_image",
        [](std::uint64_t seed, int side, bool low_contrast) {
          SynthSample s = synth_image(seed, side, low_contrast);
          return py::make_tuple(from_image(s.image), from_mask(s.gt));
        },
        py::arg("seed"), py::arg("side") = 96, py::arg("low_contrast") = false);
  m.def("synth_dataset",
        [](int n, std::uint64_t seed, const std::string& out_dir, bool low_contrast) {
          SynthOptions options;
          options.count = n;
          options.seed = seed;
          options.low_contrast = low_contrast;
          return synth_dataset(options, out_dir);
        },
        py::arg("n"), py::arg("seed"), py::arg("out_dir"), py::arg("low_contrast") = false);

  // pipeline commands
  m.def("train",
        [](const std::string& data_dir, const std::string& bundle_dir,
           const std::string& config_json, const std::string& cache_dir) {
          PipelineConfig config;
          if (!config_json.empty()) config = config_from_json_text(config_json);
          TrainReport report;
          {
            py::gil_scoped_release release;
            report = cmd_train(data_dir, bundle_dir, config, cache_dir);
          }
          py::dict out;
          out["samples"] = report.sample_count;
          out["final_loss"] = report.mlp_epoch_losses.back();
          out["forest_oob_mae"] = report.forest_oob_mae;
          out["train_images"] = report.train_stems.size();
          out["val_images"] = report.val_stems.size();
          return out;
        },
        py::arg("data_dir"), py::arg("bundle_dir"), py::arg("config_json") = "",
        py::arg("cache_dir") = "");
  m.def("infer",
        [](const std::string& input_path, const std::string& bundle_dir,
           const std::string& out_dir, const std::string& model, bool use_crf,
           bool save_levels, int jobs) {
          std::vector<InferResult> results;
          {
            py::gil_scoped_release release;
            results = cmd_infer(input_path, bundle_dir, out_dir, model, use_crf,
                                save_levels, jobs);
          }
          py::list out;
          for (const auto& r : results) {
            py::dict d;
            d["stem"] = r.stem;
            d["final"] = from_map(r.final);
            d["fused"] = from_map(r.fused);
            out.append(d);
          }
          return out;
        },
        py::arg("input_path"), py::arg("bundle_dir"), py::arg("out_dir"),
        py::arg("model") = "mdf", py::arg("use_crf") = true,
        py::arg("save_levels") = false, py::arg("jobs") = 0);
  m.def("evaluate",
        [](const std::string& maps_dir, const std::string& gts_dir,
           const std::string& out_prefix) {
          EvalReport report = cmd_eval(maps_dir, gts_dir, out_prefix);
          py::dict out;
          out["images"] = report.per_image.size();
          out["auc"] = report.dataset_auc;
          out["max_f"] = report.dataset_max_f;
          out["adaptive_f"] = report.mean_adaptive.f;
          out["mae"] = report.mean_mae;
          return out;
        },
        py::arg("maps_dir"), py::arg("gts_dir"), py::arg("out_prefix") = "");
  m.def("dataset_check",
        [](const std::string& annotation_dir, const std::string& out_dir, double cutoff,
           int dilation_radius) {
          auto checks = cmd_dataset_check(annotation_dir, out_dir, cutoff, dilation_radius);
          py::list out;
          for (const auto& c : checks) {
            py::dict d;
            d["stem"] = c.stem;
            d["consistency"] = c.consistency;
            d["included"] = c.included;
            d["min_chi_square"] = c.min_chi_square;
            d["components"] = c.component_count;
            d["touches_boundary"] = c.touches_boundary;
            out.append(d);
          }
          return out;
        },
        py::arg("annotation_dir"), py::arg("out_dir"), py::arg("cutoff") = 0.9,
        py::arg("dilation_radius") = 15);
}
