#ifndef SAL_MLP_HPP
#define SAL_MLP_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "sal/backbone.hpp"
#include "sal/image.hpp"
#include "sal/segmentation.hpp"

namespace sal {

// Two tanh hidden layers and a sigmoid output unit over S-3CNN features.
// The second hidden activation doubles as the deep contrast feature.
struct MlpModel {
  int input_dim = 0;
  int hidden1 = 300;
  int hidden2 = 300;
  std::vector<double> w1, b1;     // hidden1 x input_dim, hidden1
  std::vector<double> w2, b2;     // hidden2 x hidden1, hidden2
  std::vector<double> w_out;      // hidden2
  double b_out = 0.0;
  std::uint64_t seed = 0;
  std::vector<double> lr_schedule;  // effective learning rate per epoch

  std::size_t parameter_count() const {
    return w1.size() + b1.size() + w2.size() + b2.size() + w_out.size() + 1;
  }
};

struct MlpOutput {
  double score = 0.0;
  std::vector<double> dcf;  // hidden2 activations, each strictly inside (-1,1)
};

struct TrainingSample {
  std::vector<double> features;
  double label = 0.0;  // 0 or 1
  double weight = 1.0;
};

MlpModel make_mlp(int input_dim, int hidden1, int hidden2, std::uint64_t seed);

MlpOutput mlp_forward(const MlpModel& model, const std::vector<double>& x);

struct MlpTrainParams {
  double lr = 0.2;
  double momentum = 0.5;
  int epochs = 100;
  int batch = 64;
  std::uint64_t seed = 0;
  int hidden1 = 300;
  int hidden2 = 300;
  int jobs = 1;
};

struct MlpTrainResult {
  MlpModel model;
  std::vector<double> epoch_losses;  // dataset loss before training, then per epoch
  double final_loss = 0.0;
  std::vector<std::string> warnings;
};

// SGD with classical momentum on the mean squared prediction error.
// The learning rate halves after any epoch whose dataset loss rose.
MlpTrainResult mlp_train(const std::vector<TrainingSample>& samples,
                         const MlpTrainParams& params);

double dataset_loss(const MlpModel& model, const std::vector<TrainingSample>& samples);

// Max relative disagreement between analytic gradients and central finite
// differences over every parameter, for one sample's squared error.
// Differences below 1e-8 count as zero.
double gradient_check(const MlpModel& model, const TrainingSample& sample,
                      double step = 1e-5);

// Region labels under the purity rule: fraction >= purity of one class.
// Counting is exact integer arithmetic; purity is read at 1e-6 resolution.
std::vector<std::pair<int, int>> select_samples(const Segmentation& seg,
                                                const BinaryMask& gt, double purity = 0.7);

struct LevelScores {
  std::vector<std::vector<double>> scores;  // per level, per region
  std::vector<SaliencyMap> maps;            // region score painted on pixels
};

LevelScores score_regions(const RasterImage& img, const SegmentationStack& stack,
                          const Backbone& net, const MlpModel& model, int jobs = 1);

void save_mlp(const MlpModel& model, const std::string& path);
MlpModel load_mlp(const std::string& path);

}  // namespace sal

#endif
