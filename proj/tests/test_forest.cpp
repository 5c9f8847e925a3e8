#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "sal/errors.hpp"
#include "sal/forest.hpp"
#include "sal/rng.hpp"

using namespace sal;

namespace {

std::vector<std::vector<double>> random_features(int n, int dim, Rng& rng) {
  std::vector<std::vector<double>> x(n, std::vector<double>(dim));
  for (auto& row : x)
    for (auto& v : row) v = rng.uniform01();
  return x;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("hdhf concatenation normalizes each block to unit length") {
  std::vector<double> dcf(300, 0.0), low(39, 0.0);
  dcf[0] = 5.0;
  low[38] = 3.0;
  std::vector<double> h = build_hdhf(dcf, low);
  REQUIRE(h.size() == 339);
  CHECK(h[0] == doctest::Approx(1.0));
  for (int i = 1; i < 300; ++i) CHECK(h[i] == 0.0);
  CHECK(h[338] == doctest::Approx(1.0));
  for (int i = 300; i < 338; ++i) CHECK(h[i] == 0.0);

  // all-zero block stays zero
  std::vector<double> zeros(300, 0.0);
  std::vector<double> h2 = build_hdhf(zeros, low);
  for (int i = 0; i < 300; ++i) CHECK(h2[i] == 0.0);

  Rng rng(4);
  std::vector<double> rd(300), rl(39);
  for (auto& v : rd) v = rng.uniform(-1, 1);
  for (auto& v : rl) v = rng.uniform(-1, 1);
  std::vector<double> h3 = build_hdhf(rd, rl);
  double n1 = 0.0, n2 = 0.0;
  for (int i = 0; i < 300; ++i) n1 += h3[i] * h3[i];
  for (int i = 300; i < 339; ++i) n2 += h3[i] * h3[i];
  CHECK(std::fabs(std::sqrt(n1) - 1.0) < 1e-12);
  CHECK(std::fabs(std::sqrt(n2) - 1.0) < 1e-12);
}

TEST_CASE("constant-label training predicts the constant") {
  Rng rng(1);
  auto x = random_features(40, 10, rng);
  std::vector<double> y(40, 1.0);
  ForestParams params;
  params.n_trees = 25;
  params.seed = 7;
  ForestTrainResult result = forest_train(x, y, params);
  for (const auto& row : x) CHECK(forest_predict(result.model, row) == 1.0);
  CHECK(result.oob_mae == doctest::Approx(0.0));
}

TEST_CASE("single sample gives single-leaf trees") {
  ForestParams params;
  params.n_trees = 5;
  params.min_leaf = 1;
  ForestTrainResult result = forest_train({{0.3, 0.7}}, {1.0}, params);
  for (const auto& tree : result.model.trees) {
    REQUIRE(tree.size() == 1);
    CHECK(tree[0].feature == -1);
    CHECK(tree[0].value == 1.0);
  }
  CHECK(forest_predict(result.model, {0.0, 0.0}) == 1.0);
  CHECK_THROWS_AS(forest_train({}, {}, params), Error);
}

TEST_CASE("axis-separable set: out-of-bag MAE under 0.1") {
  // label = 1 iff feature 300 > 0.5; a band of neighboring dimensions echoes
  // the signal (as correlated hybrid features do), the rest is noise
  Rng rng(99);
  auto x = random_features(500, 339, rng);
  std::vector<double> y(500);
  for (int i = 0; i < 500; ++i) {
    y[i] = x[i][300] > 0.5 ? 1.0 : 0.0;
    for (int d = 296; d <= 305; ++d)
      if (d != 300) x[i][d] = x[i][300] + rng.uniform(-0.02, 0.02);
  }
  ForestParams params;  // defaults: 200 trees, depth 12, mtry 19
  params.seed = 2024;
  ForestTrainResult result = forest_train(x, y, params);
  CHECK(result.oob_mae < 0.1);
}

TEST_CASE("debug memorization: no bootstrap, unlimited depth, min_leaf 1") {
  Rng rng(5);
  auto x = random_features(60, 6, rng);
  std::vector<double> y(60);
  for (int i = 0; i < 60; ++i) y[i] = rng.uniform01() < 0.5 ? 0.0 : 1.0;
  ForestParams params;
  params.n_trees = 1;
  params.max_depth = 0;  // unlimited
  params.min_leaf = 1;
  params.bootstrap = false;
  params.seed = 3;
  ForestTrainResult result = forest_train(x, y, params);
  for (int i = 0; i < 60; ++i)
    CHECK(forest_predict(result.model, x[i]) == doctest::Approx(y[i]));
}

TEST_CASE("batch prediction equals per-sample prediction") {
  Rng rng(13);
  auto x = random_features(120, 12, rng);
  std::vector<double> y(120);
  for (int i = 0; i < 120; ++i) y[i] = x[i][3] > 0.4 ? 1.0 : 0.0;
  ForestParams params;
  params.n_trees = 30;
  params.seed = 8;
  ForestTrainResult result = forest_train(x, y, params);

  auto queries = random_features(50, 12, rng);
  std::vector<double> batch = forest_predict_batch(result.model, queries, 2);
  for (int i = 0; i < 50; ++i) CHECK(batch[i] == forest_predict(result.model, queries[i]));
  for (double v : batch) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }

  CHECK_THROWS_AS(forest_predict(result.model, {0.0}), Error);
}

TEST_CASE("39-dim low-level-only forest trains with mtry 7") {
  Rng rng(21);
  auto x = random_features(300, 39, rng);
  std::vector<double> y(300);
  for (int i = 0; i < 300; ++i) {
    y[i] = x[i][10] > 0.5 ? 1.0 : 0.0;
    for (int d = 8; d <= 12; ++d)
      if (d != 10) x[i][d] = x[i][10] + rng.uniform(-0.02, 0.02);
  }
  ForestParams params;
  params.n_trees = 60;
  params.seed = 77;
  ForestTrainResult result = forest_train(x, y, params);
  // auto mtry = ceil(sqrt(39)) = 7
  CHECK(result.oob_mae < 0.1);
}

TEST_CASE("same seed serializes identically; file round trip predicts the same") {
  Rng rng(31);
  auto x = random_features(80, 9, rng);
  std::vector<double> y(80);
  for (int i = 0; i < 80; ++i) y[i] = x[i][0] > 0.6 ? 1.0 : 0.0;
  ForestParams params;
  params.n_trees = 15;
  params.seed = 5;

  ForestModel a = forest_train(x, y, params).model;
  ForestModel b = forest_train(x, y, params).model;
  auto dir = std::filesystem::temp_directory_path();
  save_forest(a, (dir / "sal_forest_a.bin").string());
  save_forest(b, (dir / "sal_forest_b.bin").string());
  CHECK(slurp((dir / "sal_forest_a.bin").string()) ==
        slurp((dir / "sal_forest_b.bin").string()));

  ForestModel back = load_forest((dir / "sal_forest_a.bin").string());
  for (int i = 0; i < 20; ++i)
    CHECK(forest_predict(back, x[i]) == forest_predict(a, x[i]));
  std::filesystem::remove(dir / "sal_forest_a.bin");
  std::filesystem::remove(dir / "sal_forest_b.bin");
}

TEST_CASE("prediction averaging is permutation-invariant in tree order") {
  Rng rng(41);
  auto x = random_features(100, 8, rng);
  std::vector<double> y(100);
  for (int i = 0; i < 100; ++i) y[i] = x[i][2] > 0.5 ? 1.0 : 0.0;
  ForestParams params;
  params.n_trees = 12;
  params.seed = 6;
  ForestModel model = forest_train(x, y, params).model;
  ForestModel reversed = model;
  std::reverse(reversed.trees.begin(), reversed.trees.end());
  for (int i = 0; i < 20; ++i)
    CHECK(forest_predict(model, x[i]) == doctest::Approx(forest_predict(reversed, x[i])).epsilon(1e-15));
}
