#include "sal/mlp.hpp"

#include <algorithm>
#include <cmath>

#include "binio.hpp"
#include "sal/parallel.hpp"
#include "sal/rng.hpp"
#include "sal/windows.hpp"

namespace sal {

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

struct Activations {
  std::vector<double> h1, h2;
  double score = 0.0;
};

Activations forward_full(const MlpModel& m, const std::vector<double>& x) {
  require(static_cast<int>(x.size()) == m.input_dim, "dim_mismatch",
          "input length does not match the model");
  Activations act;
  act.h1.resize(m.hidden1);
  for (int j = 0; j < m.hidden1; ++j) {
    const double* row = m.w1.data() + static_cast<std::size_t>(j) * m.input_dim;
    double z = m.b1[j];
    for (int i = 0; i < m.input_dim; ++i) z += row[i] * x[i];
    act.h1[j] = std::tanh(z);
  }
  act.h2.resize(m.hidden2);
  for (int j = 0; j < m.hidden2; ++j) {
    const double* row = m.w2.data() + static_cast<std::size_t>(j) * m.hidden1;
    double z = m.b2[j];
    for (int i = 0; i < m.hidden1; ++i) z += row[i] * act.h1[i];
    act.h2[j] = std::tanh(z);
  }
  double z = m.b_out;
  for (int j = 0; j < m.hidden2; ++j) z += m.w_out[j] * act.h2[j];
  act.score = sigmoid(z);
  return act;
}

// Gradient of weight * (score - label)^2 for one sample, appended into flat
// parameter order (w1, b1, w2, b2, w_out, b_out).
void accumulate_gradient(const MlpModel& m, const TrainingSample& s,
                         const Activations& act, double* grad) {
  double delta_out =
      2.0 * (act.score - s.label) * act.score * (1.0 - act.score) * s.weight;
  std::vector<double> delta2(m.hidden2);
  for (int j = 0; j < m.hidden2; ++j)
    delta2[j] = delta_out * m.w_out[j] * (1.0 - act.h2[j] * act.h2[j]);
  std::vector<double> delta1(m.hidden1, 0.0);
  for (int j = 0; j < m.hidden2; ++j) {
    const double* row = m.w2.data() + static_cast<std::size_t>(j) * m.hidden1;
    for (int i = 0; i < m.hidden1; ++i) delta1[i] += delta2[j] * row[i];
  }
  for (int i = 0; i < m.hidden1; ++i) delta1[i] *= 1.0 - act.h1[i] * act.h1[i];

  double* g = grad;
  for (int j = 0; j < m.hidden1; ++j)
    for (int i = 0; i < m.input_dim; ++i) *g++ += delta1[j] * s.features[i];
  for (int j = 0; j < m.hidden1; ++j) *g++ += delta1[j];
  for (int j = 0; j < m.hidden2; ++j)
    for (int i = 0; i < m.hidden1; ++i) *g++ += delta2[j] * act.h1[i];
  for (int j = 0; j < m.hidden2; ++j) *g++ += delta2[j];
  for (int j = 0; j < m.hidden2; ++j) *g++ += delta_out * act.h2[j];
  *g++ += delta_out;
}

std::vector<double*> parameter_views(MlpModel& m, std::vector<std::size_t>& sizes) {
  sizes = {m.w1.size(), m.b1.size(), m.w2.size(), m.b2.size(), m.w_out.size(), 1};
  return {m.w1.data(), m.b1.data(), m.w2.data(), m.b2.data(), m.w_out.data(), &m.b_out};
}

}  // namespace

MlpModel make_mlp(int input_dim, int hidden1, int hidden2, std::uint64_t seed) {
  require(input_dim >= 1 && hidden1 >= 1 && hidden2 >= 1, "bad_param",
          "all layer widths must be positive");
  MlpModel m;
  m.input_dim = input_dim;
  m.hidden1 = hidden1;
  m.hidden2 = hidden2;
  m.seed = seed;
  m.w1.resize(static_cast<std::size_t>(hidden1) * input_dim);
  m.b1.assign(hidden1, 0.0);
  m.w2.resize(static_cast<std::size_t>(hidden2) * hidden1);
  m.b2.assign(hidden2, 0.0);
  m.w_out.resize(hidden2);

  Rng rng(seed);
  auto glorot = [&](std::vector<double>& w, int fan_in, int fan_out) {
    double a = std::sqrt(6.0 / (fan_in + fan_out));
    for (double& v : w) v = rng.uniform(-a, a);
  };
  glorot(m.w1, input_dim, hidden1);
  glorot(m.w2, hidden1, hidden2);
  glorot(m.w_out, hidden2, 1);
  return m;
}

MlpOutput mlp_forward(const MlpModel& model, const std::vector<double>& x) {
  Activations act = forward_full(model, x);
  return MlpOutput{act.score, std::move(act.h2)};
}

double dataset_loss(const MlpModel& model, const std::vector<TrainingSample>& samples) {
  double loss = 0.0, wsum = 0.0;
  for (const auto& s : samples) {
    double d = forward_full(model, s.features).score - s.label;
    loss += s.weight * d * d;
    wsum += s.weight;
  }
  return wsum > 0.0 ? loss / wsum : 0.0;
}

MlpTrainResult mlp_train(const std::vector<TrainingSample>& samples,
                         const MlpTrainParams& params) {
  require(!samples.empty(), "empty_samples", "training requires at least one sample");
  MlpTrainResult result;

  bool has_pos = false, has_neg = false;
  for (const auto& s : samples) (s.label > 0.5 ? has_pos : has_neg) = true;
  if (!has_pos || !has_neg)
    result.warnings.push_back("training set contains a single class");

  const int dim = static_cast<int>(samples[0].features.size());
  MlpModel model = make_mlp(dim, params.hidden1, params.hidden2, params.seed);

  std::vector<std::size_t> sizes;
  auto views = parameter_views(model, sizes);
  std::size_t total = 0;
  for (auto s : sizes) total += s;
  std::vector<double> velocity(total, 0.0);

  double lr = params.lr;
  result.epoch_losses.push_back(dataset_loss(model, samples));
  model.lr_schedule.clear();

  Rng shuffle_rng(Rng::mix(params.seed, 1));
  std::vector<std::size_t> order(samples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  // Fixed chunking keeps the gradient reduction order independent of the
  // worker count.
  const int chunk_count = 8;
  std::vector<std::vector<double>> chunk_grads(chunk_count);
  std::vector<double> grad(total);

  for (int epoch = 0; epoch < params.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(params.batch)) {
      std::size_t end = std::min(order.size(), start + params.batch);
      std::size_t n = end - start;

      std::fill(grad.begin(), grad.end(), 0.0);
      if (params.jobs > 1 && n >= 16) {
        for (auto& g : chunk_grads) g.assign(total, 0.0);
        parallel_for(chunk_count, params.jobs, [&](std::size_t c) {
          for (std::size_t i = start + c; i < end; i += chunk_count) {
            const auto& s = samples[order[i]];
            accumulate_gradient(model, s, forward_full(model, s.features),
                                chunk_grads[c].data());
          }
        });
        for (const auto& g : chunk_grads)
          for (std::size_t i = 0; i < total; ++i) grad[i] += g[i];
      } else {
        for (std::size_t i = start; i < end; ++i) {
          const auto& s = samples[order[i]];
          accumulate_gradient(model, s, forward_full(model, s.features), grad.data());
        }
      }

      double scale = 1.0 / static_cast<double>(n);
      std::size_t offset = 0;
      for (std::size_t v = 0; v < views.size(); ++v) {
        double* w = views[v];
        for (std::size_t i = 0; i < sizes[v]; ++i) {
          double& vel = velocity[offset + i];
          vel = params.momentum * vel - lr * grad[offset + i] * scale;
          w[i] += vel;
        }
        offset += sizes[v];
      }
    }

    model.lr_schedule.push_back(lr);
    double loss = dataset_loss(model, samples);
    if (loss > result.epoch_losses.back()) lr *= 0.5;
    result.epoch_losses.push_back(loss);
  }

  result.final_loss = result.epoch_losses.back();
  result.model = std::move(model);
  return result;
}

double gradient_check(const MlpModel& model, const TrainingSample& sample,
                      double step) {
  MlpModel work = model;
  std::vector<std::size_t> sizes;
  auto views = parameter_views(work, sizes);
  std::size_t total = 0;
  for (auto s : sizes) total += s;

  std::vector<double> analytic(total, 0.0);
  accumulate_gradient(work, sample, forward_full(work, sample.features), analytic.data());

  auto loss_at = [&]() {
    double d = forward_full(work, sample.features).score - sample.label;
    return sample.weight * d * d;
  };

  double worst = 0.0;
  std::size_t offset = 0;
  for (std::size_t v = 0; v < views.size(); ++v) {
    double* w = views[v];
    for (std::size_t i = 0; i < sizes[v]; ++i) {
      double original = w[i];
      w[i] = original + step;
      double hi = loss_at();
      w[i] = original - step;
      double lo = loss_at();
      w[i] = original;
      double numeric = (hi - lo) / (2.0 * step);
      double a = analytic[offset + i];
      double diff = std::fabs(a - numeric);
      if (diff > 1e-8) worst = std::max(worst, diff / std::max(std::fabs(a), std::fabs(numeric)));
    }
    offset += sizes[v];
  }
  return worst;
}

std::vector<std::pair<int, int>> select_samples(const Segmentation& seg,
                                                const BinaryMask& gt, double purity) {
  require(gt.width == seg.width && gt.height == seg.height, "size_mismatch",
          "mask dimensions must match the segmentation");
  require(purity > 0.5 && purity <= 1.0, "bad_param", "purity must be in (0.5, 1]");
  const std::int64_t purity_micro = std::llround(purity * 1e6);

  std::vector<std::pair<int, int>> out;
  for (int r = 0; r < seg.region_count(); ++r) {
    std::int64_t salient = 0;
    for (int p : seg.regions[r].pixels) salient += gt.values[p];
    std::int64_t area = seg.regions[r].area;
    if (salient * 1000000 >= purity_micro * area)
      out.emplace_back(r, 1);
    else if ((area - salient) * 1000000 >= purity_micro * area)
      out.emplace_back(r, 0);
  }
  return out;
}

LevelScores score_regions(const RasterImage& img, const SegmentationStack& stack,
                          const Backbone& net, const MlpModel& model, int jobs) {
  LevelScores out;
  out.scores.resize(stack.levels.size());
  out.maps.resize(stack.levels.size());

  // Flatten (level, region) pairs so regions parallelize across levels too.
  std::vector<std::pair<int, int>> work;
  for (std::size_t l = 0; l < stack.levels.size(); ++l) {
    out.scores[l].assign(stack.levels[l].region_count(), 0.0);
    for (int r = 0; r < stack.levels[l].region_count(); ++r)
      work.emplace_back(static_cast<int>(l), r);
  }
  parallel_for(work.size(), jobs, [&](std::size_t i) {
    auto [l, r] = work[i];
    std::vector<double> f = s3cnn_extract(img, stack.levels[l], r, net);
    out.scores[l][r] = mlp_forward(model, f).score;
  });

  for (std::size_t l = 0; l < stack.levels.size(); ++l) {
    const Segmentation& seg = stack.levels[l];
    SaliencyMap map(seg.width, seg.height);
    for (std::size_t p = 0; p < map.size(); ++p) map.values[p] = out.scores[l][seg.labels[p]];
    out.maps[l] = std::move(map);
  }
  return out;
}

void save_mlp(const MlpModel& model, const std::string& path) {
  auto out = binio::open_out(path);
  nlohmann::json header;
  header["format"] = "mlp-v1";
  header["D"] = model.input_dim / 3;
  header["input_dim"] = model.input_dim;
  header["H1"] = model.hidden1;
  header["H2"] = model.hidden2;
  header["seed"] = model.seed;
  header["lr_schedule"] = model.lr_schedule;
  binio::write_header(out, header);
  binio::write_vec(out, model.w1);
  binio::write_vec(out, model.b1);
  binio::write_vec(out, model.w2);
  binio::write_vec(out, model.b2);
  binio::write_vec(out, model.w_out);
  binio::write_pod(out, model.b_out);
  require(out.good(), "unwritable_file", "failed writing " + path);
}

MlpModel load_mlp(const std::string& path) {
  auto in = binio::open_in(path);
  nlohmann::json header = binio::read_header(in, "mlp-v1");
  MlpModel m;
  m.input_dim = header.at("input_dim").get<int>();
  m.hidden1 = header.at("H1").get<int>();
  m.hidden2 = header.at("H2").get<int>();
  m.seed = header.at("seed").get<std::uint64_t>();
  m.lr_schedule = header.at("lr_schedule").get<std::vector<double>>();
  m.w1 = binio::read_vec<double>(in, static_cast<std::size_t>(m.hidden1) * m.input_dim);
  m.b1 = binio::read_vec<double>(in, m.hidden1);
  m.w2 = binio::read_vec<double>(in, static_cast<std::size_t>(m.hidden2) * m.hidden1);
  m.b2 = binio::read_vec<double>(in, m.hidden2);
  m.w_out = binio::read_vec<double>(in, m.hidden2);
  m.b_out = binio::read_pod<double>(in);
  return m;
}

}  // namespace sal
