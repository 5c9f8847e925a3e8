#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <map>
#include <set>

#include "sal/backbone.hpp"
#include "sal/mlp.hpp"
#include "sal/rng.hpp"
#include "sal/segmentation.hpp"
#include "sal/synth.hpp"

using namespace sal;

namespace {

// Straight dot-product forward pass, kept independent of the library code.
double oracle_score(const MlpModel& m, const std::vector<double>& x,
                    std::vector<double>* dcf_out = nullptr) {
  std::vector<double> h1(m.hidden1), h2(m.hidden2);
  for (int j = 0; j < m.hidden1; ++j) {
    double z = m.b1[j];
    for (int i = 0; i < m.input_dim; ++i) z += m.w1[j * m.input_dim + i] * x[i];
    h1[j] = std::tanh(z);
  }
  for (int j = 0; j < m.hidden2; ++j) {
    double z = m.b2[j];
    for (int i = 0; i < m.hidden1; ++i) z += m.w2[j * m.hidden1 + i] * h1[i];
    h2[j] = std::tanh(z);
  }
  double z = m.b_out;
  for (int j = 0; j < m.hidden2; ++j) z += m.w_out[j] * h2[j];
  if (dcf_out) *dcf_out = h2;
  return 1.0 / (1.0 + std::exp(-z));
}

std::vector<TrainingSample> separable_clusters(int per_class, int dim,
                                               std::uint64_t seed) {
  Rng rng(seed);
  std::vector<TrainingSample> samples;
  for (int i = 0; i < per_class; ++i) {
    TrainingSample pos, neg;
    for (int d = 0; d < dim; ++d) {
      pos.features.push_back(1.0 + 0.2 * rng.uniform01());
      neg.features.push_back(-1.0 - 0.2 * rng.uniform01());
    }
    pos.label = 1.0;
    neg.label = 0.0;
    samples.push_back(std::move(pos));
    samples.push_back(std::move(neg));
  }
  return samples;
}

}  // namespace

TEST_CASE("mlp forward degenerate weight patterns") {
  MlpModel zero = make_mlp(6, 8, 8, 1);
  std::fill(zero.w1.begin(), zero.w1.end(), 0.0);
  std::fill(zero.w2.begin(), zero.w2.end(), 0.0);
  std::fill(zero.w_out.begin(), zero.w_out.end(), 0.0);
  MlpOutput out = mlp_forward(zero, std::vector<double>(6, 0.7));
  CHECK(out.score == doctest::Approx(0.5));
  for (double v : out.dcf) CHECK(v == 0.0);

  zero.b_out = 1.3;
  out = mlp_forward(zero, std::vector<double>(6, -0.4));
  CHECK(out.score == doctest::Approx(1.0 / (1.0 + std::exp(-1.3))));

  CHECK_THROWS_AS(mlp_forward(zero, std::vector<double>(5, 0.0)), Error);
}

TEST_CASE("mlp forward matches the dot-product oracle") {
  MlpModel m = make_mlp(12, 17, 9, 2024);
  Rng rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> x(12);
    for (auto& v : x) v = rng.uniform(-2.0, 2.0);
    std::vector<double> dcf_oracle;
    double expect = oracle_score(m, x, &dcf_oracle);
    MlpOutput got = mlp_forward(m, x);
    CHECK(std::fabs(got.score - expect) < 1e-12);
    REQUIRE(got.dcf.size() == dcf_oracle.size());
    for (std::size_t i = 0; i < dcf_oracle.size(); ++i) {
      CHECK(std::fabs(got.dcf[i] - dcf_oracle[i]) < 1e-12);
      CHECK(std::fabs(got.dcf[i]) < 1.0);  // strictly inside (-1,1)
    }
  }
}

TEST_CASE("analytic gradients match central differences") {
  Rng rng(31);
  for (int trial = 0; trial < 5; ++trial) {
    MlpModel m = make_mlp(9, 7, 6, 1000 + trial);
    TrainingSample s;
    for (int i = 0; i < 9; ++i) s.features.push_back(rng.uniform(-1.5, 1.5));
    s.label = trial % 2;
    CHECK(gradient_check(m, s) <= 1e-5);
  }

  // zero-gradient point: all-zero weights score 0.5 against target 0.5
  MlpModel flat = make_mlp(4, 5, 5, 0);
  std::fill(flat.w1.begin(), flat.w1.end(), 0.0);
  std::fill(flat.w2.begin(), flat.w2.end(), 0.0);
  std::fill(flat.w_out.begin(), flat.w_out.end(), 0.0);
  TrainingSample mid;
  mid.features = {0.3, -0.2, 0.9, 0.0};
  mid.label = 0.5;
  CHECK(gradient_check(flat, mid) == 0.0);

  // coarser steps lose accuracy (second-order discretization)
  MlpModel m = make_mlp(9, 7, 6, 4242);
  TrainingSample s;
  for (int i = 0; i < 9; ++i) s.features.push_back(0.25 * (i - 4));
  s.label = 1.0;
  CHECK(gradient_check(m, s, 1e-3) > gradient_check(m, s, 1e-5));
}

TEST_CASE("training drives the loss down on separable clusters") {
  auto samples = separable_clusters(10, 6, 77);  // 20 samples
  MlpTrainParams params;
  params.epochs = 200;
  params.batch = 8;
  params.seed = 3;
  params.hidden1 = 16;
  params.hidden2 = 16;
  MlpTrainResult result = mlp_train(samples, params);
  CHECK(result.final_loss < 0.02);
  CHECK(result.final_loss <= result.epoch_losses.front());
  CHECK(result.warnings.empty());
}

TEST_CASE("epochs=0 returns the initialization unchanged") {
  auto samples = separable_clusters(4, 5, 1);
  MlpTrainParams params;
  params.epochs = 0;
  params.seed = 99;
  params.hidden1 = 7;
  params.hidden2 = 7;
  MlpTrainResult result = mlp_train(samples, params);
  MlpModel init = make_mlp(5, 7, 7, 99);
  CHECK(result.model.w1 == init.w1);
  CHECK(result.model.w2 == init.w2);
  CHECK(result.model.w_out == init.w_out);
  CHECK(result.model.b_out == init.b_out);
}

TEST_CASE("duplicated dataset still trains to the same quality") {
  auto samples = separable_clusters(10, 6, 9);
  std::vector<TrainingSample> doubled = samples;
  doubled.insert(doubled.end(), samples.begin(), samples.end());

  MlpTrainParams params;
  params.epochs = 150;
  params.batch = 8;
  params.seed = 5;
  params.hidden1 = 12;
  params.hidden2 = 12;
  MlpTrainResult single = mlp_train(samples, params);
  MlpTrainResult dup = mlp_train(doubled, params);
  CHECK(single.final_loss < 0.02);
  CHECK(dup.final_loss < 0.02);
  CHECK(dup.final_loss <= dup.epoch_losses.front());
}

TEST_CASE("single-class training warns but still runs") {
  std::vector<TrainingSample> ones;
  for (int i = 0; i < 6; ++i) ones.push_back({{0.1 * i, 1.0 - 0.1 * i}, 1.0, 1.0});
  MlpTrainParams params;
  params.epochs = 5;
  params.hidden1 = 4;
  params.hidden2 = 4;
  MlpTrainResult result = mlp_train(ones, params);
  CHECK(result.warnings.size() == 1);
  CHECK_THROWS_AS(mlp_train({}, params), Error);
}

TEST_CASE("select_samples applies the purity rule with exact counting") {
  // 10x10 image, region 0 = the first 25 pixels
  std::vector<int> labels(100, 1);
  for (int p = 0; p < 25; ++p) labels[p] = 0;
  Segmentation seg = segmentation_from_labels(labels, 10, 10);

  BinaryMask gt(10, 10, 0);
  for (int p = 0; p < 18; ++p) gt.values[p] = 1;  // 18/25 = 72% of region 0

  auto picks = [&](double purity) {
    auto out = select_samples(seg, gt, purity);
    return std::map<int, int>(out.begin(), out.end());
  };
  auto at70 = picks(0.7);
  REQUIRE(at70.count(0) == 1);
  CHECK(at70.at(0) == 1);  // 72% >= 70%
  CHECK(picks(0.75).count(0) == 0);  // 72% < 75% and 28% < 75%

  // the complement region is pure background
  CHECK(at70.count(1) == 1);
  CHECK(at70.at(1) == 0);

  // 50/50 region excluded; exactly 70% included (>= with exact counting)
  std::vector<int> two(100);
  for (int p = 0; p < 100; ++p) two[p] = p < 50 ? 0 : 1;
  Segmentation halves = segmentation_from_labels(two, 10, 10);
  BinaryMask even(10, 10, 0);
  for (int p = 0; p < 25; ++p) even.values[p] = 1;  // region 0: exactly 50%
  for (auto [r, label] : select_samples(halves, even, 0.7)) CHECK(r != 0);

  BinaryMask exact(10, 10, 0);
  for (int p = 0; p < 35; ++p) exact.values[p] = 1;  // region 0: 35/50 = 70%
  bool found = false;
  for (auto [r, label] : select_samples(halves, exact, 0.7))
    if (r == 0) {
      found = true;
      CHECK(label == 1);
    }
  CHECK(found);
}

TEST_CASE("score_regions paints region scores onto pixels") {
  SynthSample sample = synth_image(40, 48);
  SegmentationStack stack = build_stack(sample.image, 2, 40, 10);
  Backbone net = make_desk_backbone(16, 11, {100, 100, 100});
  MlpModel m = make_mlp(3 * net.feature_dim(), 10, 10, 3);

  LevelScores scores = score_regions(sample.image, stack, net, m);
  REQUIRE(scores.maps.size() == stack.levels.size());
  for (std::size_t l = 0; l < stack.levels.size(); ++l) {
    const Segmentation& seg = stack.levels[l];
    std::set<double> support(scores.maps[l].values.begin(), scores.maps[l].values.end());
    CHECK(static_cast<int>(support.size()) <= seg.region_count());
    for (std::size_t p = 0; p < scores.maps[l].size(); ++p)
      CHECK(scores.maps[l].values[p] == scores.scores[l][seg.labels[p]]);
  }

  // single-region level: constant map
  Segmentation whole = segmentation_from_labels(
      std::vector<int>(sample.image.pixel_count(), 0), sample.image.width,
      sample.image.height);
  SegmentationStack one;
  one.levels.push_back(whole);
  LevelScores s1 = score_regions(sample.image, one, net, m);
  for (double v : s1.maps[0].values) CHECK(v == s1.scores[0][0]);
}

TEST_CASE("mlp file round trip preserves the model") {
  MlpModel m = make_mlp(9, 11, 13, 555);
  m.lr_schedule = {0.2, 0.2, 0.1};
  std::string path = (std::filesystem::temp_directory_path() / "sal_test_mlp.bin").string();
  save_mlp(m, path);
  MlpModel back = load_mlp(path);
  CHECK(back.w1 == m.w1);
  CHECK(back.b1 == m.b1);
  CHECK(back.w2 == m.w2);
  CHECK(back.b2 == m.b2);
  CHECK(back.w_out == m.w_out);
  CHECK(back.b_out == m.b_out);
  CHECK(back.lr_schedule == m.lr_schedule);
  std::filesystem::remove(path);
}
