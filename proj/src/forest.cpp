#include "sal/forest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "binio.hpp"
#include "sal/parallel.hpp"
#include "sal/rng.hpp"

namespace sal {

std::vector<double> build_hdhf(const std::vector<double>& dcf,
                               const std::vector<double>& low) {
  auto normalized = [](const std::vector<double>& v) {
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    std::vector<double> out(v);
    if (norm > 0.0)
      for (double& x : out) x /= norm;
    return out;
  };
  std::vector<double> out = normalized(dcf);
  std::vector<double> tail = normalized(low);
  out.insert(out.end(), tail.begin(), tail.end());
  return out;
}

namespace {

struct TreeBuilder {
  const std::vector<std::vector<double>>& x;
  const std::vector<double>& y;
  const ForestParams& params;
  int dim;
  int mtry;
  Rng rng;
  std::vector<ForestModel::Node> nodes;
  std::vector<int> feature_pool;

  TreeBuilder(const std::vector<std::vector<double>>& x_, const std::vector<double>& y_,
              const ForestParams& params_, int dim_, int mtry_, std::uint64_t seed)
      : x(x_), y(y_), params(params_), dim(dim_), mtry(mtry_), rng(seed),
        feature_pool(dim_) {
    std::iota(feature_pool.begin(), feature_pool.end(), 0);
  }

  double mean_of(const std::vector<int>& idx) const {
    double s = 0.0;
    for (int i : idx) s += y[i];
    return s / static_cast<double>(idx.size());
  }

  bool pure(const std::vector<int>& idx) const {
    for (std::size_t i = 1; i < idx.size(); ++i)
      if (y[idx[i]] != y[idx[0]]) return false;
    return true;
  }

  // Partial Fisher-Yates: the first mtry entries become the candidate set.
  void sample_features() {
    for (int i = 0; i < mtry; ++i) {
      int j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(dim - i)));
      std::swap(feature_pool[i], feature_pool[j]);
    }
  }

  int build(std::vector<int> idx, int depth) {
    int node_id = static_cast<int>(nodes.size());
    nodes.push_back({});
    nodes[node_id].value = mean_of(idx);

    int n = static_cast<int>(idx.size());
    bool depth_stop = params.max_depth > 0 && depth >= params.max_depth;
    if (depth_stop || n < 2 * params.min_leaf || pure(idx)) return node_id;

    sample_features();
    int best_feature = -1;
    double best_threshold = 0.0;
    double best_score = -1.0;  // sum_l^2/n_l + sum_r^2/n_r, larger is better

    std::vector<std::pair<double, double>> vals(n);  // (feature value, label)
    for (int fi = 0; fi < mtry; ++fi) {
      int f = feature_pool[fi];
      double total_sum = 0.0;
      for (int i = 0; i < n; ++i) {
        vals[i] = {x[idx[i]][f], y[idx[i]]};
        total_sum += vals[i].second;
      }
      std::sort(vals.begin(), vals.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      double left_sum = 0.0;
      for (int i = 0; i < n - 1; ++i) {
        left_sum += vals[i].second;
        if (vals[i].first == vals[i + 1].first) continue;
        int nl = i + 1, nr = n - nl;
        if (nl < params.min_leaf || nr < params.min_leaf) continue;
        double right_sum = total_sum - left_sum;
        double score = left_sum * left_sum / nl + right_sum * right_sum / nr;
        if (score > best_score) {
          best_score = score;
          best_feature = f;
          best_threshold = 0.5 * (vals[i].first + vals[i + 1].first);
        }
      }
    }
    if (best_feature < 0) return node_id;

    std::vector<int> left_idx, right_idx;
    for (int i : idx)
      (x[i][best_feature] <= best_threshold ? left_idx : right_idx).push_back(i);
    if (left_idx.empty() || right_idx.empty()) return node_id;
    idx.clear();
    idx.shrink_to_fit();

    nodes[node_id].feature = best_feature;
    nodes[node_id].threshold = best_threshold;
    int left = build(std::move(left_idx), depth + 1);
    int right = build(std::move(right_idx), depth + 1);
    nodes[node_id].left = left;
    nodes[node_id].right = right;
    return node_id;
  }
};

double predict_tree(const std::vector<ForestModel::Node>& nodes,
                    const std::vector<double>& x) {
  int node = 0;
  while (nodes[node].feature >= 0)
    node = x[nodes[node].feature] <= nodes[node].threshold ? nodes[node].left
                                                           : nodes[node].right;
  return nodes[node].value;
}

}  // namespace

ForestTrainResult forest_train(const std::vector<std::vector<double>>& features,
                               const std::vector<double>& labels,
                               const ForestParams& params) {
  require(!features.empty(), "empty_samples", "forest training requires samples");
  require(features.size() == labels.size(), "size_mismatch",
          "feature and label counts differ");
  require(params.n_trees >= 1 && params.min_leaf >= 1, "bad_param",
          "invalid forest parameters");

  const int n = static_cast<int>(features.size());
  const int dim = static_cast<int>(features[0].size());
  int mtry = params.features_per_split > 0
                 ? std::min(params.features_per_split, dim)
                 : static_cast<int>(std::ceil(std::sqrt(static_cast<double>(dim))));

  ForestTrainResult result;
  result.model.dim = dim;
  result.model.params = params;
  result.model.trees.resize(params.n_trees);

  std::vector<std::vector<std::uint8_t>> in_bag(params.n_trees);
  parallel_for(static_cast<std::size_t>(params.n_trees), params.jobs, [&](std::size_t t) {
    std::uint64_t tree_seed = Rng::mix(params.seed, t);
    Rng boot(Rng::mix(tree_seed, 0xb007));
    std::vector<int> idx;
    idx.reserve(n);
    in_bag[t].assign(n, 0);
    if (params.bootstrap) {
      for (int i = 0; i < n; ++i) {
        int j = static_cast<int>(boot.below(static_cast<std::uint64_t>(n)));
        idx.push_back(j);
        in_bag[t][j] = 1;
      }
      std::sort(idx.begin(), idx.end());
    } else {
      for (int i = 0; i < n; ++i) idx.push_back(i);
      std::fill(in_bag[t].begin(), in_bag[t].end(), 1);
    }
    TreeBuilder builder(features, labels, params, dim, mtry, tree_seed);
    builder.build(std::move(idx), 0);
    result.model.trees[t] = std::move(builder.nodes);
  });

  // Out-of-bag predictions, averaged over the trees that skipped the sample.
  std::vector<double> sums(n, 0.0);
  std::vector<int> counts(n, 0);
  for (int t = 0; t < params.n_trees; ++t)
    for (int i = 0; i < n; ++i)
      if (!in_bag[t][i]) {
        sums[i] += predict_tree(result.model.trees[t], features[i]);
        ++counts[i];
      }
  result.oob_prediction.assign(n, std::numeric_limits<double>::quiet_NaN());
  double err = 0.0;
  int covered = 0;
  for (int i = 0; i < n; ++i)
    if (counts[i] > 0) {
      double pred = std::clamp(sums[i] / counts[i], 0.0, 1.0);
      result.oob_prediction[i] = pred;
      err += std::fabs(pred - labels[i]);
      ++covered;
    }
  result.oob_mae = covered > 0 ? err / covered : std::numeric_limits<double>::quiet_NaN();
  return result;
}

double forest_predict(const ForestModel& model, const std::vector<double>& x) {
  require(static_cast<int>(x.size()) == model.dim, "dim_mismatch",
          "input length does not match the forest");
  double sum = 0.0;
  for (const auto& tree : model.trees) sum += predict_tree(tree, x);
  return std::clamp(sum / static_cast<double>(model.trees.size()), 0.0, 1.0);
}

std::vector<double> forest_predict_batch(const ForestModel& model,
                                         const std::vector<std::vector<double>>& xs,
                                         int jobs) {
  std::vector<double> out(xs.size());
  parallel_for(xs.size(), jobs, [&](std::size_t i) { out[i] = forest_predict(model, xs[i]); });
  return out;
}

void save_forest(const ForestModel& model, const std::string& path) {
  auto out = binio::open_out(path);
  nlohmann::json header;
  header["format"] = "forest-v1";
  header["dim"] = model.dim;
  header["n_trees"] = model.params.n_trees;
  header["max_depth"] = model.params.max_depth;
  header["min_leaf"] = model.params.min_leaf;
  header["features_per_split"] = model.params.features_per_split;
  header["bootstrap"] = model.params.bootstrap;
  header["seed"] = model.params.seed;
  std::vector<std::size_t> node_counts;
  for (const auto& tree : model.trees) node_counts.push_back(tree.size());
  header["tree_nodes"] = node_counts;
  binio::write_header(out, header);

  // Struct-of-arrays layout: features, thresholds, left, right, leaf values.
  for (const auto& tree : model.trees)
    for (const auto& n : tree) binio::write_pod<std::int32_t>(out, n.feature);
  for (const auto& tree : model.trees)
    for (const auto& n : tree) binio::write_pod<double>(out, n.threshold);
  for (const auto& tree : model.trees)
    for (const auto& n : tree) binio::write_pod<std::int32_t>(out, n.left);
  for (const auto& tree : model.trees)
    for (const auto& n : tree) binio::write_pod<std::int32_t>(out, n.right);
  for (const auto& tree : model.trees)
    for (const auto& n : tree) binio::write_pod<double>(out, n.value);
  require(out.good(), "unwritable_file", "failed writing " + path);
}

ForestModel load_forest(const std::string& path) {
  auto in = binio::open_in(path);
  nlohmann::json header = binio::read_header(in, "forest-v1");
  ForestModel model;
  model.dim = header.at("dim").get<int>();
  model.params.n_trees = header.at("n_trees").get<int>();
  model.params.max_depth = header.at("max_depth").get<int>();
  model.params.min_leaf = header.at("min_leaf").get<int>();
  model.params.features_per_split = header.at("features_per_split").get<int>();
  model.params.bootstrap = header.at("bootstrap").get<bool>();
  model.params.seed = header.at("seed").get<std::uint64_t>();
  auto node_counts = header.at("tree_nodes").get<std::vector<std::size_t>>();
  require(static_cast<int>(node_counts.size()) == model.params.n_trees, "bad_header",
          "tree count mismatch");

  model.trees.resize(node_counts.size());
  for (std::size_t t = 0; t < node_counts.size(); ++t)
    model.trees[t].resize(node_counts[t]);
  for (auto& tree : model.trees)
    for (auto& n : tree) n.feature = binio::read_pod<std::int32_t>(in);
  for (auto& tree : model.trees)
    for (auto& n : tree) n.threshold = binio::read_pod<double>(in);
  for (auto& tree : model.trees)
    for (auto& n : tree) n.left = binio::read_pod<std::int32_t>(in);
  for (auto& tree : model.trees)
    for (auto& n : tree) n.right = binio::read_pod<std::int32_t>(in);
  for (auto& tree : model.trees)
    for (auto& n : tree) n.value = binio::read_pod<double>(in);
  return model;
}

}  // namespace sal
