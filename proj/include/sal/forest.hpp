#ifndef SAL_FOREST_HPP
#define SAL_FOREST_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace sal {

// 339-dim hybrid feature: L2-normalized 300-dim deep contrast block followed
// by the L2-normalized 39-dim handcrafted block. All-zero blocks stay zero.
std::vector<double> build_hdhf(const std::vector<double>& dcf,
                               const std::vector<double>& low);

struct ForestParams {
  int n_trees = 200;
  int max_depth = 12;  // <= 0 means unlimited
  int min_leaf = 5;
  int features_per_split = 0;  // 0 selects ceil(sqrt(dim))
  bool bootstrap = true;
  std::uint64_t seed = 0;
  int jobs = 1;
};

struct ForestModel {
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;  // node mean of the labels
  };
  int dim = 0;
  ForestParams params;
  std::vector<std::vector<Node>> trees;
};

struct ForestTrainResult {
  ForestModel model;
  std::vector<double> oob_prediction;  // NaN where a sample was never out of bag
  double oob_mae = 0.0;                // over samples with an OOB prediction
};

// Regression forest with variance-reduction splits over a random feature
// subset per node and midpoint thresholds. Deterministic for a fixed seed.
ForestTrainResult forest_train(const std::vector<std::vector<double>>& features,
                               const std::vector<double>& labels,
                               const ForestParams& params);

double forest_predict(const ForestModel& model, const std::vector<double>& x);
std::vector<double> forest_predict_batch(const ForestModel& model,
                                         const std::vector<std::vector<double>>& xs,
                                         int jobs = 1);

void save_forest(const ForestModel& model, const std::string& path);
ForestModel load_forest(const std::string& path);

}  // namespace sal

#endif
