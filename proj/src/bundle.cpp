#include "sal/bundle.hpp"

#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "sal/rng.hpp"

namespace fs = std::filesystem;

namespace sal {

std::uint64_t PipelineConfig::backbone_seed() const { return Rng::mix(seed, 101); }
std::uint64_t PipelineConfig::mlp_seed() const { return Rng::mix(seed, 102); }
std::uint64_t PipelineConfig::forest_seed() const { return Rng::mix(seed, 103); }
std::uint64_t PipelineConfig::sample_seed() const { return Rng::mix(seed, 104); }

namespace {

nlohmann::json config_to_json(const PipelineConfig& c) {
  nlohmann::json j;
  j["seed"] = c.seed;
  j["levels"] = c.levels;
  j["finest_target"] = c.finest_target;
  j["coarsest_target"] = c.coarsest_target;
  j["sigma"] = c.sigma;
  j["purity"] = c.purity;
  j["input_side"] = c.input_side;
  j["border"] = c.border;
  j["bg_thresh"] = c.bg_thresh;
  j["lr"] = c.lr;
  j["momentum"] = c.momentum;
  j["epochs"] = c.epochs;
  j["batch"] = c.batch;
  j["hidden"] = c.hidden;
  j["max_samples"] = c.max_samples;
  j["forest"] = {{"n_trees", c.forest.n_trees},
                 {"max_depth", c.forest.max_depth},
                 {"min_leaf", c.forest.min_leaf},
                 {"features_per_split", c.forest.features_per_split},
                 {"bootstrap", c.forest.bootstrap}};
  j["crf"] = {{"w1", c.crf.w1},
              {"w2", c.crf.w2},
              {"sigma_alpha", c.crf.sigma_alpha},
              {"sigma_beta", c.crf.sigma_beta},
              {"sigma_gamma", c.crf.sigma_gamma},
              {"iterations", c.crf.iterations}};
  j["split"] = c.split;
  j["jobs"] = c.jobs;
  return j;
}

PipelineConfig config_from_json(const nlohmann::json& j) {
  PipelineConfig c;
  c.seed = j.value("seed", c.seed);
  c.levels = j.value("levels", c.levels);
  c.finest_target = j.value("finest_target", c.finest_target);
  c.coarsest_target = j.value("coarsest_target", c.coarsest_target);
  c.sigma = j.value("sigma", c.sigma);
  c.purity = j.value("purity", c.purity);
  c.input_side = j.value("input_side", c.input_side);
  c.border = j.value("border", c.border);
  c.bg_thresh = j.value("bg_thresh", c.bg_thresh);
  c.lr = j.value("lr", c.lr);
  c.momentum = j.value("momentum", c.momentum);
  c.epochs = j.value("epochs", c.epochs);
  c.batch = j.value("batch", c.batch);
  c.hidden = j.value("hidden", c.hidden);
  c.max_samples = j.value("max_samples", c.max_samples);
  if (j.contains("forest")) {
    const auto& f = j.at("forest");
    c.forest.n_trees = f.value("n_trees", c.forest.n_trees);
    c.forest.max_depth = f.value("max_depth", c.forest.max_depth);
    c.forest.min_leaf = f.value("min_leaf", c.forest.min_leaf);
    c.forest.features_per_split = f.value("features_per_split", c.forest.features_per_split);
    c.forest.bootstrap = f.value("bootstrap", c.forest.bootstrap);
  }
  if (j.contains("crf")) {
    const auto& r = j.at("crf");
    c.crf.w1 = r.value("w1", c.crf.w1);
    c.crf.w2 = r.value("w2", c.crf.w2);
    c.crf.sigma_alpha = r.value("sigma_alpha", c.crf.sigma_alpha);
    c.crf.sigma_beta = r.value("sigma_beta", c.crf.sigma_beta);
    c.crf.sigma_gamma = r.value("sigma_gamma", c.crf.sigma_gamma);
    c.crf.iterations = r.value("iterations", c.crf.iterations);
  }
  if (j.contains("split")) {
    auto s = j.at("split").get<std::vector<int>>();
    require(s.size() == 3, "bad_config", "split must have three entries");
    std::copy(s.begin(), s.end(), c.split.begin());
  }
  c.jobs = j.value("jobs", c.jobs);
  return c;
}

}  // namespace

std::string config_to_json_text(const PipelineConfig& config) {
  return config_to_json(config).dump(2);
}

PipelineConfig config_from_json_text(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  require(!j.is_discarded(), "bad_config", "config is not valid JSON");
  return config_from_json(j);
}

PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "unreadable_file", "cannot read config " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return config_from_json_text(text);
}

void save_config(const PipelineConfig& config, const std::string& path) {
  std::ofstream out(path);
  require(out.good(), "unwritable_file", "cannot write config " + path);
  out << config_to_json_text(config) << "\n";
}

std::uint64_t fnv1a64_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), "unreadable_file", "cannot read " + path);
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  char buf[4096];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      hash ^= static_cast<unsigned char>(buf[i]);
      hash *= 0x100000001b3ULL;
    }
    if (!in) break;
  }
  return hash;
}

void save_bundle(const ModelBundle& bundle, const std::string& dir) {
  fs::create_directories(dir);
  const std::string backbone_path = (fs::path(dir) / "backbone.bin").string();
  const std::string mlp_path = (fs::path(dir) / "mlp.bin").string();
  const std::string forest_path = (fs::path(dir) / "forest.bin").string();
  save_backbone(bundle.backbone, backbone_path);
  save_mlp(bundle.mlp, mlp_path);
  save_forest(bundle.forest, forest_path);

  nlohmann::json j;
  j["format_version"] = bundle.format_version;
  j["config"] = nlohmann::json::parse(config_to_json_text(bundle.config));
  j["fusion"] = {{"mdf", bundle.fusion_mdf.alphas},
                 {"mdf_residual", bundle.fusion_mdf.residual},
                 {"hdhf", bundle.fusion_hdhf.alphas},
                 {"hdhf_residual", bundle.fusion_hdhf.residual}};
  j["crf"] = {{"w1", bundle.crf.w1},
              {"w2", bundle.crf.w2},
              {"sigma_alpha", bundle.crf.sigma_alpha},
              {"sigma_beta", bundle.crf.sigma_beta},
              {"sigma_gamma", bundle.crf.sigma_gamma},
              {"iterations", bundle.crf.iterations}};
  j["files"] = {
      {"backbone", {{"path", "backbone.bin"}, {"fnv1a64", fnv1a64_file(backbone_path)}}},
      {"mlp", {{"path", "mlp.bin"}, {"fnv1a64", fnv1a64_file(mlp_path)}}},
      {"forest", {{"path", "forest.bin"}, {"fnv1a64", fnv1a64_file(forest_path)}}}};

  std::ofstream out(fs::path(dir) / "bundle.json");
  require(out.good(), "unwritable_file", "cannot write bundle.json in " + dir);
  out << j.dump(2) << "\n";
}

ModelBundle load_bundle(const std::string& dir) {
  std::ifstream in(fs::path(dir) / "bundle.json");
  require(in.good(), "unreadable_file", "cannot read bundle.json in " + dir);
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  require(!j.is_discarded(), "bad_bundle", "bundle.json is not valid JSON");

  ModelBundle bundle;
  bundle.format_version = j.at("format_version").get<int>();
  require(bundle.format_version == 1, "version_mismatch",
          "unsupported bundle format version " + std::to_string(bundle.format_version));
  bundle.config = config_from_json_text(j.at("config").dump());

  for (const char* key : {"backbone", "mlp", "forest"}) {
    const auto& f = j.at("files").at(key);
    fs::path path = fs::path(dir) / f.at("path").get<std::string>();
    require(fs::exists(path), "missing_file", "bundle references missing " + path.string());
    auto expected = f.at("fnv1a64").get<std::uint64_t>();
    require(fnv1a64_file(path.string()) == expected, "checksum_mismatch",
            "checksum mismatch for " + path.string());
  }
  bundle.backbone = load_backbone((fs::path(dir) / "backbone.bin").string());
  bundle.mlp = load_mlp((fs::path(dir) / "mlp.bin").string());
  bundle.forest = load_forest((fs::path(dir) / "forest.bin").string());

  bundle.fusion_mdf.alphas = j.at("fusion").at("mdf").get<std::vector<double>>();
  bundle.fusion_mdf.residual = j.at("fusion").at("mdf_residual").get<double>();
  bundle.fusion_hdhf.alphas = j.at("fusion").at("hdhf").get<std::vector<double>>();
  bundle.fusion_hdhf.residual = j.at("fusion").at("hdhf_residual").get<double>();
  const auto& r = j.at("crf");
  bundle.crf.w1 = r.at("w1").get<double>();
  bundle.crf.w2 = r.at("w2").get<double>();
  bundle.crf.sigma_alpha = r.at("sigma_alpha").get<double>();
  bundle.crf.sigma_beta = r.at("sigma_beta").get<double>();
  bundle.crf.sigma_gamma = r.at("sigma_gamma").get<double>();
  bundle.crf.iterations = r.at("iterations").get<int>();
  return bundle;
}

}  // namespace sal
