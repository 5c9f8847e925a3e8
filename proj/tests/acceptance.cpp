// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Oracles are written inline and kept independent of the library
// code paths they check.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <string>
#include <vector>

#include "sal/crf.hpp"
#include "sal/fusion.hpp"
#include "sal/lowlevel.hpp"
#include "sal/metrics.hpp"
#include "sal/mlp.hpp"
#include "sal/pipeline.hpp"
#include "sal/png_io.hpp"
#include "sal/rng.hpp"
#include "sal/segmentation.hpp"
#include "sal/synth.hpp"
#include "test_textures.hpp"

using namespace sal;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& what,
            const std::string& detail) {
  std::printf("criterion-%d %s: %s (%s)\n", criterion, pass ? "PASS" : "FAIL",
              what.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

double now_seconds() {
  using clock = std::chrono::steady_clock;
  static const clock::time_point start = clock::now();
  return std::chrono::duration<double>(clock::now() - start).count();
}

SaliencyMap random_map(Rng& rng, int w, int h) {
  SaliencyMap m(w, h);
  for (auto& v : m.values) v = rng.uniform01();
  return m;
}

BinaryMask random_mask(Rng& rng, int w, int h, double p = 0.5) {
  BinaryMask m(w, h);
  for (auto& v : m.values) v = rng.uniform01() < p ? 1 : 0;
  return m;
}

// ---------------------------------------------------------------- criterion 1
void criterion_gradients() {
  double t0 = now_seconds();
  double worst = 0.0;
  Rng rng(90001);
  for (int pair = 0; pair < 20; ++pair) {
    MlpModel model = make_mlp(9, 8, 8, 7000 + pair);
    TrainingSample sample;
    for (int i = 0; i < 9; ++i) sample.features.push_back(rng.uniform(-2.0, 2.0));
    sample.label = pair % 2;
    worst = std::max(worst, gradient_check(model, sample));
  }
  double elapsed = now_seconds() - t0;
  char detail[128];
  std::snprintf(detail, sizeof(detail), "max relative error %.3g, %.2f s", worst,
                elapsed);
  report(1, worst <= 1e-5 && elapsed < 10.0, "MLP analytic gradients vs central differences",
         detail);
}

// ---------------------------------------------------------------- criterion 2
SaliencyMap oracle_mean_field(const RasterImage& img, const SaliencyMap& init,
                              const CrfParams& params) {
  const int w = img.width, h = img.height;
  const std::size_t n = init.size();
  std::vector<double> p1(n), p0(n);
  for (std::size_t i = 0; i < n; ++i) {
    p1[i] = std::clamp(init.values[i], 1e-6, 1.0 - 1e-6);
    p0[i] = 1.0 - p1[i];
  }
  std::vector<double> q1(p1), q0(p0);
  for (int iter = 0; iter < params.iterations; ++iter) {
    std::vector<double> n1(n), n0(n);
    for (std::size_t i = 0; i < n; ++i) {
      int xi = static_cast<int>(i) % w, yi = static_cast<int>(i) / w;
      double m1 = 0.0, m0 = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        int xj = static_cast<int>(j) % w, yj = static_cast<int>(j) / w;
        double d2 = double(xi - xj) * (xi - xj) + double(yi - yj) * (yi - yj);
        double c2 = 0.0;
        for (int c = 0; c < 3; ++c) {
          double d = double(img.px(xi, yi)[c]) - img.px(xj, yj)[c];
          c2 += d * d;
        }
        double k =
            params.w1 * std::exp(-d2 / (2 * params.sigma_alpha * params.sigma_alpha) -
                                 c2 / (2 * params.sigma_beta * params.sigma_beta)) +
            params.w2 * std::exp(-d2 / (2 * params.sigma_gamma * params.sigma_gamma));
        m1 += q0[j] * k;
        m0 += q1[j] * k;
      }
      double a = p1[i] * std::exp(-m1);
      double b = p0[i] * std::exp(-m0);
      n1[i] = a / (a + b);
      n0[i] = b / (a + b);
    }
    q1 = n1;
    q0 = n0;
  }
  SaliencyMap out(w, h);
  out.values = q1;
  return out;
}

void criterion_crf_oracle() {
  Rng rng(90002);
  CrfParams params;  // 3.0, 5.0, 3.0, 50.0, 3.0
  params.iterations = 10;
  double worst = 0.0;
  for (int trial = 0; trial < 25; ++trial) {
    RasterImage img(6, 6);
    for (auto& v : img.data) v = static_cast<std::uint8_t>(rng.below(256));
    SaliencyMap init = random_map(rng, 6, 6);
    SaliencyMap fast = crf_refine(img, init, params);
    SaliencyMap slow = oracle_mean_field(img, init, params);
    for (std::size_t p = 0; p < fast.size(); ++p)
      worst = std::max(worst, std::fabs(fast.values[p] - slow.values[p]));
  }

  bool zero_ok = true;
  {
    RasterImage img(6, 6);
    for (auto& v : img.data) v = static_cast<std::uint8_t>(rng.below(256));
    SaliencyMap init = random_map(rng, 6, 6);
    init.values[0] = 0.0;
    init.values[1] = 1.0;
    CrfParams zero = params;
    zero.w1 = zero.w2 = 0.0;
    SaliencyMap out = crf_refine(img, init, zero);
    for (std::size_t p = 0; p < init.size(); ++p)
      zero_ok = zero_ok &&
                out.values[p] == std::clamp(init.values[p], 1e-6, 1.0 - 1e-6);
  }
  char detail[128];
  std::snprintf(detail, sizeof(detail), "max marginal gap %.3g, zero-pairwise %s", worst,
                zero_ok ? "exact" : "broken");
  report(2, worst < 1e-10 && zero_ok, "CRF mean field vs brute-force oracle", detail);
}

// ---------------------------------------------------------------- criterion 3
void criterion_fusion() {
  Rng rng(90003);
  double worst_gap = 0.0;
  bool optimal = true;
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<std::vector<SaliencyMap>> level_maps;
    std::vector<BinaryMask> gts;
    for (int img = 0; img < 2; ++img) {
      BinaryMask gt = random_mask(rng, 8, 8);
      std::vector<SaliencyMap> maps;
      for (int k = 0; k < 3; ++k) {
        SaliencyMap m = random_map(rng, 8, 8);
        for (std::size_t p = 0; p < m.size(); ++p)
          m.values[p] = std::clamp(0.7 * m.values[p] + 0.3 * gt.values[p], 0.0, 1.0);
        maps.push_back(std::move(m));
      }
      level_maps.push_back(std::move(maps));
      gts.push_back(std::move(gt));
    }
    FusionWeights fit = fit_fusion(level_maps, gts);

    // dense oracle: explicit design matrix, Gauss-Jordan solve
    const int m = 3;
    std::vector<std::vector<double>> g;
    std::vector<double> y;
    for (std::size_t i = 0; i < level_maps.size(); ++i)
      for (std::size_t p = 0; p < gts[i].values.size(); ++p) {
        std::vector<double> row(m);
        for (int k = 0; k < m; ++k) row[k] = level_maps[i][k].values[p];
        g.push_back(std::move(row));
        y.push_back(gts[i].values[p]);
      }
    std::vector<std::vector<double>> a(m, std::vector<double>(m + 1, 0.0));
    for (int r = 0; r < m; ++r) {
      for (int c = 0; c < m; ++c) {
        for (std::size_t i = 0; i < g.size(); ++i) a[r][c] += g[i][r] * g[i][c];
        if (r == c) a[r][c] += kFusionRidge;
      }
      for (std::size_t i = 0; i < g.size(); ++i) a[r][m] += g[i][r] * y[i];
    }
    for (int col = 0; col < m; ++col) {
      int pivot = col;
      for (int r = col + 1; r < m; ++r)
        if (std::fabs(a[r][col]) > std::fabs(a[pivot][col])) pivot = r;
      std::swap(a[col], a[pivot]);
      for (int r = 0; r < m; ++r) {
        if (r == col) continue;
        double f = a[r][col] / a[col][col];
        for (int c = col; c <= m; ++c) a[r][c] -= f * a[col][c];
      }
    }
    std::vector<double> oracle_alpha(m);
    for (int r = 0; r < m; ++r) oracle_alpha[r] = a[r][m] / a[r][r];
    auto residual_of = [&](const std::vector<double>& alpha) {
      double res = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) {
        double pred = 0.0;
        for (int k = 0; k < m; ++k) pred += alpha[k] * g[i][k];
        res += (y[i] - pred) * (y[i] - pred);
      }
      for (double v : alpha) res += kFusionRidge * v * v;
      return res;
    };
    worst_gap = std::max(worst_gap, std::fabs(fit.residual - residual_of(oracle_alpha)));

    for (int k = 0; k < m; ++k)
      for (double delta : {1e-3, -1e-3}) {
        std::vector<double> nudged = fit.alphas;
        nudged[k] += delta;
        if (residual_of(nudged) < fit.residual - 1e-12) optimal = false;
      }
  }
  char detail[128];
  std::snprintf(detail, sizeof(detail), "max residual gap %.3g, perturbations %s",
                worst_gap, optimal ? "never improve" : "improved");
  report(3, worst_gap < 1e-8 && optimal, "fusion fit vs dense normal equations", detail);
}

// ---------------------------------------------------------------- criterion 4
void criterion_metrics() {
  Rng rng(90004);
  bool ok = true;
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    SaliencyMap map = random_map(rng, 8, 8);
    BinaryMask gt = random_mask(rng, 8, 8);
    PrCurve curve = pr_roc_single(map, gt);

    // exhaustive counting oracle per threshold
    std::vector<std::array<double, 4>> pts(256);
    for (int t = 0; t < 256; ++t) {
      long long tp = 0, fp = 0, fn = 0, tn = 0;
      for (std::size_t p = 0; p < map.size(); ++p) {
        bool pred = std::lround(map.values[p] * 255.0) >= t;
        bool truth = gt.values[p] != 0;
        if (pred && truth)
          ++tp;
        else if (pred)
          ++fp;
        else if (truth)
          ++fn;
        else
          ++tn;
      }
      pts[t] = {(tp + fp) > 0 ? double(tp) / (tp + fp) : 1.0,
                (tp + fn) > 0 ? double(tp) / (tp + fn) : 1.0,
                (tp + fn) > 0 ? double(tp) / (tp + fn) : 1.0,
                (fp + tn) > 0 ? double(fp) / (fp + tn) : 0.0};
      worst = std::max({worst, std::fabs(curve.points[t].precision - pts[t][0]),
                        std::fabs(curve.points[t].recall - pts[t][1]),
                        std::fabs(curve.points[t].fpr - pts[t][3])});
    }

    // trapezoidal AUC over oracle ROC points
    std::vector<std::pair<double, double>> roc = {{0.0, 0.0}, {1.0, 1.0}};
    for (int t = 0; t < 256; ++t) roc.emplace_back(pts[t][3], pts[t][2]);
    std::sort(roc.begin(), roc.end());
    double oracle_auc = 0.0;
    for (std::size_t i = 1; i < roc.size(); ++i)
      oracle_auc +=
          (roc[i].first - roc[i - 1].first) * 0.5 * (roc[i].second + roc[i - 1].second);
    worst = std::max(worst, std::fabs(auc(curve) - oracle_auc));

    double oracle_maxf = 0.0;
    for (int t = 0; t < 256; ++t) {
      double denom = 0.3 * pts[t][0] + pts[t][1];
      if (denom > 0) oracle_maxf = std::max(oracle_maxf, 1.3 * pts[t][0] * pts[t][1] / denom);
    }
    worst = std::max(worst, std::fabs(max_f(curve) - oracle_maxf));

    // adaptive threshold oracle
    double mean = 0.0;
    for (double v : map.values) mean += v;
    double ta = std::min(1.0, 2.0 * mean / double(map.size()));
    long long tp = 0, fp = 0, fn = 0;
    double mae_sum = 0.0;
    for (std::size_t p = 0; p < map.size(); ++p) {
      bool pred = map.values[p] >= ta;
      if (pred && gt.values[p])
        ++tp;
      else if (pred)
        ++fp;
      else if (gt.values[p])
        ++fn;
      mae_sum += std::fabs(map.values[p] - double(gt.values[p]));
    }
    double op = (tp + fp) > 0 ? double(tp) / (tp + fp) : 1.0;
    double orecall = (tp + fn) > 0 ? double(tp) / (tp + fn) : 1.0;
    double of = (0.3 * op + orecall) > 0 ? 1.3 * op * orecall / (0.3 * op + orecall) : 0.0;
    AdaptivePrf ap = adaptive_prf(map, gt);
    worst = std::max({worst, std::fabs(ap.precision - op), std::fabs(ap.recall - orecall),
                      std::fabs(ap.f - of)});
    worst = std::max(worst, std::fabs(mae(map, gt) - mae_sum / double(map.size())));
  }
  ok = worst <= 1e-12;

  // identity cases: the ground truth as its own map
  BinaryMask gt = random_mask(rng, 8, 8);
  SaliencyMap self(8, 8);
  for (std::size_t p = 0; p < self.size(); ++p) self.values[p] = gt.values[p];
  PrCurve c = pr_roc_single(self, gt);
  bool identity =
      std::fabs(auc(c) - 1.0) < 1e-12 && std::fabs(max_f(c) - 1.0) < 1e-12 &&
      mae(self, gt) == 0.0;

  char detail[128];
  std::snprintf(detail, sizeof(detail), "max oracle gap %.3g, identity %s", worst,
                identity ? "holds" : "broken");
  report(4, ok && identity, "PR/ROC/AUC/max-F/adaptive/MAE vs counting oracles", detail);
}

// ---------------------------------------------------------------- criterion 5
void criterion_descriptor() {
  // independent straightforward implementation (two-pass stats, own binning,
  // own chi-square and perimeter)
  struct Oracle {
    const ImageFeatures& feat;
    std::vector<double> hist3d(const std::vector<int>& pixels, ColorSpace space) const {
      std::vector<double> bins(512, 0.0);
      for (int p : pixels) {
        int x = p % feat.width, y = p / feat.width;
        double v[3];
        if (space == ColorSpace::Rgb)
          for (int c = 0; c < 3; ++c) v[c] = feat.rgb->px(x, y)[c];
        else if (space == ColorSpace::Lab)
          for (int c = 0; c < 3; ++c) v[c] = feat.lab.at(c, x, y);
        else
          for (int c = 0; c < 3; ++c) v[c] = feat.hsv.at(c, x, y);
        int b[3];
        for (int c = 0; c < 3; ++c) {
          double t = space == ColorSpace::Rgb ? v[c] / 256.0
                     : space == ColorSpace::Lab
                         ? (c == 0 ? v[c] / 100.0 : (v[c] + 128.0) / 256.0)
                         : v[c];
          b[c] = std::min(7, std::max(0, int(std::floor(t * 8))));
        }
        bins[(b[0] * 8 + b[1]) * 8 + b[2]] += 1.0;
      }
      double n = double(pixels.size());
      if (n > 0)
        for (auto& v : bins) v /= n;
      return bins;
    }
    static double chi2(const std::vector<double>& a, const std::vector<double>& b) {
      double acc = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] + b[i] > 0) acc += (a[i] - b[i]) * (a[i] - b[i]) / (a[i] + b[i]);
      return acc / 2.0;
    }
    std::vector<double> texture(const std::vector<std::uint8_t>& map,
                                const std::vector<int>& pixels, int nbins) const {
      std::vector<double> bins(nbins, 0.0);
      for (int p : pixels) bins[map[p]] += 1.0;
      for (auto& v : bins) v /= double(pixels.size());
      return bins;
    }
    void mean_var(const std::vector<int>& pixels, ColorSpace space, double* mean,
                  double* var) const {
      for (int c = 0; c < 3; ++c) mean[c] = var[c] = 0.0;
      for (int p : pixels) {
        int x = p % feat.width, y = p / feat.width;
        for (int c = 0; c < 3; ++c)
          mean[c] += space == ColorSpace::Rgb   ? feat.rgb->px(x, y)[c]
                     : space == ColorSpace::Lab ? feat.lab.at(c, x, y)
                                                : feat.hsv.at(c, x, y);
      }
      for (int c = 0; c < 3; ++c) mean[c] /= double(pixels.size());
      for (int p : pixels) {
        int x = p % feat.width, y = p / feat.width;
        for (int c = 0; c < 3; ++c) {
          double v = space == ColorSpace::Rgb   ? feat.rgb->px(x, y)[c]
                     : space == ColorSpace::Lab ? feat.lab.at(c, x, y)
                                                : feat.hsv.at(c, x, y);
          var[c] += (v - mean[c]) * (v - mean[c]);
        }
      }
      for (int c = 0; c < 3; ++c) var[c] /= double(pixels.size());
    }
    std::vector<double> run(const Segmentation& seg, int r,
                            const std::vector<int>& bg) const {
      std::vector<int> all(std::size_t(feat.width) * feat.height);
      std::iota(all.begin(), all.end(), 0);
      const auto& reg = seg.regions[r].pixels;
      std::vector<double> out;
      for (ColorSpace space : {ColorSpace::Rgb, ColorSpace::Lab, ColorSpace::Hsv}) {
        double mr[3], vr[3], mb[3], vb[3], mi[3], vi[3];
        mean_var(reg, space, mr, vr);
        mean_var(bg, space, mb, vb);
        mean_var(all, space, mi, vi);
        for (int c = 0; c < 3; ++c) out.push_back(std::fabs(mr[c] - mb[c]));
        for (int c = 0; c < 3; ++c) out.push_back(std::fabs(mr[c] - mi[c]));
        out.push_back(chi2(hist3d(reg, space), hist3d(bg, space)));
        out.push_back(chi2(hist3d(reg, space), hist3d(all, space)));
      }
      out.push_back(chi2(texture(feat.lm_index, reg, 48), texture(feat.lm_index, bg, 48)));
      out.push_back(
          chi2(texture(feat.lm_index, reg, 48), texture(feat.lm_index, all, 48)));
      out.push_back(
          chi2(texture(feat.lbp_code, reg, 256), texture(feat.lbp_code, bg, 256)));
      out.push_back(
          chi2(texture(feat.lbp_code, reg, 256), texture(feat.lbp_code, all, 256)));
      for (ColorSpace space : {ColorSpace::Rgb, ColorSpace::Lab, ColorSpace::Hsv}) {
        double m[3], v[3];
        mean_var(reg, space, m, v);
        for (int c = 0; c < 3; ++c) out.push_back(v[c]);
      }
      int perim = 0;
      for (int p : reg) {
        int x = p % seg.width, y = p / seg.width;
        bool edge = x == 0 || y == 0 || x == seg.width - 1 || y == seg.height - 1 ||
                    seg.labels[p - 1] != r || seg.labels[p + 1] != r ||
                    seg.labels[p - seg.width] != r || seg.labels[p + seg.width] != r;
        if (edge) ++perim;
      }
      out.push_back(perim / (2.0 * (seg.width + seg.height)));
      out.push_back(double(reg.size()) / (double(seg.width) * seg.height));
      return out;
    }
  };

  Rng rng(90005);
  double worst = 0.0;
  for (int instance = 0; instance < 5; ++instance) {
    int w = 6 + (instance % 3), h = 6 + (instance % 2);
    RasterImage img(w, h);
    for (auto& v : img.data) v = static_cast<std::uint8_t>(rng.below(256));
    std::vector<int> labels(std::size_t(w) * h);
    int split = 1 + int(rng.below(std::uint64_t(w - 1)));
    for (int p = 0; p < w * h; ++p) labels[p] = (p % w) < split ? 0 : 1;
    Segmentation seg = segmentation_from_labels(labels, w, h);
    ImageFeatures feat = compute_image_features(img);

    std::vector<int> bg;
    for (int x = 0; x < w; ++x) bg.push_back((h - 1) * w + x);
    PixelSetStats bg_stats = pixel_set_stats(feat, bg);
    std::vector<int> all(std::size_t(w) * h);
    std::iota(all.begin(), all.end(), 0);
    PixelSetStats img_stats = pixel_set_stats(feat, all);

    Oracle oracle{feat};
    for (int r = 0; r < 2; ++r) {
      LowLevelDescriptor d = descriptor(feat, seg, r, bg_stats, img_stats);
      std::vector<double> expect = oracle.run(seg, r, bg);
      for (int i = 0; i < kDescriptorDim; ++i)
        worst = std::max(worst, std::fabs(d.values[i] - expect[i]));
    }
  }

  bool chi_ok = true;
  for (int trial = 0; trial < 1000; ++trial) {
    Histogram h1, h2;
    h1.bins.resize(32);
    h2.bins.resize(32);
    double s1 = 0, s2 = 0;
    for (int i = 0; i < 32; ++i) {
      h1.bins[i] = rng.uniform01() < 0.25 ? 0.0 : rng.uniform01();
      h2.bins[i] = rng.uniform01() < 0.25 ? 0.0 : rng.uniform01();
      s1 += h1.bins[i];
      s2 += h2.bins[i];
    }
    if (s1 > 0)
      for (auto& v : h1.bins) v /= s1;
    if (s2 > 0)
      for (auto& v : h2.bins) v /= s2;
    double d12 = chi_square(h1, h2), d21 = chi_square(h2, h1);
    chi_ok = chi_ok && d12 == d21 && d12 >= 0.0;
    chi_ok = chi_ok && chi_square(h1, h1) == 0.0;
    if (d12 == 0.0)
      for (int i = 0; i < 32; ++i)
        chi_ok = chi_ok && std::fabs(h1.bins[i] - h2.bins[i]) < 1e-15;
  }

  char detail[128];
  std::snprintf(detail, sizeof(detail), "max descriptor gap %.3g, chi-square %s", worst,
                chi_ok ? "symmetric/zero-iff-equal" : "broken");
  report(5, worst < 1e-9 && chi_ok, "39-dim descriptor vs independent implementation",
         detail);
}

// ---------------------------------------------------------------- criterion 6
void criterion_segmentation() {
  bool uniform_ok = true;
  {
    RasterImage img(96, 96, 77, 140, 20);
    SegmentationStack stack = build_stack(img, 15, 300, 20);
    for (const auto& seg : stack.levels) uniform_ok = uniform_ok && seg.region_count() == 1;
  }

  bool invariants_ok = true;
  for (int i = 0; i < 20; ++i) {
    SynthSample sample = synth_image(5000 + i, 96);
    Segmentation seg = graph_segment(sample.image, 80.0 + 40.0 * i, 10);
    long long area = 0;
    for (const auto& r : seg.regions) area += r.area;
    invariants_ok = invariants_ok && area == 96 * 96;
    for (int r = 0; r < seg.region_count() && invariants_ok; ++r)
      for (int nadj : seg.adjacency[r]) {
        invariants_ok = invariants_ok && nadj != r;
        const auto& back = seg.adjacency[nadj];
        invariants_ok =
            invariants_ok && std::find(back.begin(), back.end(), r) != back.end();
      }
  }

  bool targets_ok = true;
  int worst_level = 0;
  double worst_ratio = 1.0;
  for (std::uint64_t seed : {1, 2, 3}) {
    RasterImage img = sal_tests::blob_mosaic(seed);
    SegmentationStack stack = build_stack(img, 15, 300, 20);
    for (int i = 1; i <= 15; ++i) {
      int target = level_region_target(15, 300, 20, i);
      double ratio = double(stack.levels[i - 1].region_count()) / target;
      if (ratio < 0.7 || ratio > 1.3) {
        targets_ok = false;
        worst_level = i;
        worst_ratio = ratio;
      }
    }
  }

  char detail[160];
  std::snprintf(detail, sizeof(detail),
                "uniform %s, invariants %s, targets %s%s", uniform_ok ? "ok" : "broken",
                invariants_ok ? "ok" : "broken", targets_ok ? "within 30%" : "missed",
                targets_ok
                    ? ""
                    : (" at level " + std::to_string(worst_level) + " ratio " +
                       std::to_string(worst_ratio))
                          .c_str());
  report(6, uniform_ok && invariants_ok && targets_ok,
         "segmentation sanity and stack targets", detail);
}

// ---------------------------------------------------------------- criterion 7
void criterion_end_to_end(const fs::path& work) {
  double t0 = now_seconds();

  fs::path all = work / "synth_all";
  SynthOptions options;
  options.count = 250;
  options.seed = 4247;
  synth_dataset(options, all.string());

  // 200 train / 50 test
  fs::path train_dir = work / "train", test_dir = work / "test";
  fs::create_directories(train_dir / "images");
  fs::create_directories(train_dir / "gt");
  fs::create_directories(test_dir / "images");
  fs::create_directories(test_dir / "gt");
  for (int i = 0; i < 250; ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "synth_%04d.png", i);
    const fs::path& dst = i < 200 ? train_dir : test_dir;
    fs::copy_file(all / "images" / name, dst / "images" / name);
    fs::copy_file(all / "gt" / name, dst / "gt" / name);
  }

  PipelineConfig config;
  config.seed = 4247;
  config.levels = 5;  // M = 5 for speed
  config.input_side = 32;
  config.epochs = 8;
  config.max_samples = 30000;
  config.forest.n_trees = 60;
  config.split = {5, 1, 0};
  config.jobs = 0;

  TrainReport train_report = cmd_train(train_dir.string(), (work / "bundle").string(), config);
  std::printf("  [c7] trained: %zu samples, final loss %.4f, forest OOB MAE %.4f (%.0f s)\n",
              train_report.sample_count, train_report.mlp_epoch_losses.back(),
              train_report.forest_oob_mae, now_seconds() - t0);
  std::fflush(stdout);

  auto entries = list_dataset(test_dir.string(), true);
  std::vector<BinaryMask> gts;
  std::vector<std::string> stems;
  std::vector<SaliencyMap> mdf_maps, hdhf_maps;
  for (const auto& e : entries) {
    RasterImage img = load_image(e.image_path);
    gts.push_back(load_mask(e.gt_path));
    stems.push_back(e.stem);
    mdf_maps.push_back(infer_image(img, train_report.bundle, "mdf", true, 0).final);
    hdhf_maps.push_back(infer_image(img, train_report.bundle, "hdhf", true, 0).final);
  }
  EvalReport mdf = evaluate_maps(mdf_maps, gts, stems);
  EvalReport hdhf = evaluate_maps(hdhf_maps, gts, stems);
  double elapsed = now_seconds() - t0;

  bool pass = mdf.dataset_max_f >= 0.85 && hdhf.dataset_max_f >= 0.85 &&
              mdf.mean_mae <= 0.10 && hdhf.mean_mae <= 0.10 &&
              hdhf.dataset_max_f >= mdf.dataset_max_f - 0.02 && elapsed <= 900.0;
  char detail[256];
  std::snprintf(detail, sizeof(detail),
                "MDF maxF %.4f MAE %.4f | HDHF maxF %.4f MAE %.4f | %.0f s",
                mdf.dataset_max_f, mdf.mean_mae, hdhf.dataset_max_f, hdhf.mean_mae,
                elapsed);
  report(7, pass, "end-to-end desk-scale quality (250 synth images, M=5)", detail);
}

// ---------------------------------------------------------------- criterion 8
SaliencyMap blur_map(const SaliencyMap& in, double sigma) {
  int half = std::max(1, int(std::ceil(3.0 * sigma)));
  std::vector<double> kern(half + 1);
  double sum = 0.0;
  for (int i = 0; i <= half; ++i) {
    kern[i] = std::exp(-0.5 * i * i / (sigma * sigma));
    sum += (i == 0 ? 1.0 : 2.0) * kern[i];
  }
  for (auto& v : kern) v /= sum;
  SaliencyMap tmp(in.width, in.height), out(in.width, in.height);
  auto cl = [](int v, int hi) { return std::clamp(v, 0, hi); };
  for (int y = 0; y < in.height; ++y)
    for (int x = 0; x < in.width; ++x) {
      double acc = kern[0] * in.at(x, y);
      for (int i = 1; i <= half; ++i)
        acc += kern[i] * (in.at(cl(x - i, in.width - 1), y) +
                          in.at(cl(x + i, in.width - 1), y));
      tmp.at(x, y) = acc;
    }
  for (int y = 0; y < in.height; ++y)
    for (int x = 0; x < in.width; ++x) {
      double acc = kern[0] * tmp.at(x, y);
      for (int i = 1; i <= half; ++i)
        acc += kern[i] * (tmp.at(x, cl(y - i, in.height - 1)) +
                          tmp.at(x, cl(y + i, in.height - 1)));
      out.at(x, y) = acc;
    }
  return out;
}

void criterion_crf_usefulness() {
  Rng rng(90008);
  CrfParams params;  // paper values, 10 iterations
  double corrupted_total = 0.0, refined_total = 0.0;
  for (int i = 0; i < 50; ++i) {
    SynthSample sample = synth_image(6000 + i, 96);
    SaliencyMap corrupted(96, 96);
    for (std::size_t p = 0; p < corrupted.size(); ++p) {
      double v = sample.gt.values[p];
      if (rng.uniform01() < 0.05) v = 1.0 - v;  // flip 5% of the pixels
      corrupted.values[p] = v;
    }
    corrupted = blur_map(corrupted, 1.5);
    SaliencyMap refined = crf_refine(sample.image, corrupted, params, 0);
    corrupted_total += mae(corrupted, sample.gt);
    refined_total += mae(refined, sample.gt);
  }
  double reduction = 1.0 - refined_total / corrupted_total;
  char detail[160];
  std::snprintf(detail, sizeof(detail),
                "mean MAE %.4f -> %.4f (reduction %.1f%%)", corrupted_total / 50.0,
                refined_total / 50.0, 100.0 * reduction);
  report(8, reduction >= 0.30, "CRF refinement on corrupted ground-truth maps", detail);
}

// ---------------------------------------------------------------- criterion 9
void criterion_dataset_tooling(const fs::path& work) {
  fs::path ann = work / "annotations";
  fs::create_directories(ann / "images");
  fs::create_directories(ann / "masks");

  RasterImage img(20, 20, 50, 60, 190);
  for (int y = 4; y < 12; ++y)
    for (int x = 4; x < 12; ++x) img.set(x, y, 210, 60, 40);

  auto write_triplet = [&](const std::string& stem, const BinaryMask& m1,
                           const BinaryMask& m2, const BinaryMask& m3) {
    save_image(img, (ann / "images" / (stem + ".png")).string());
    save_mask(m1, (ann / "masks" / (stem + ".1.png")).string());
    save_mask(m2, (ann / "masks" / (stem + ".2.png")).string());
    save_mask(m3, (ann / "masks" / (stem + ".3.png")).string());
  };

  // consistency 0: pairwise disjoint single-pixel marks
  BinaryMask z1(20, 20, 0), z2(20, 20, 0), z3(20, 20, 0);
  z1.at(0, 0) = 1;
  z2.at(5, 5) = 1;
  z3.at(9, 9) = 1;
  write_triplet("c000", z1, z2, z3);

  // consistency 0.85 and 0.9: |inter|/|union| = 85/100 and 90/100
  BinaryMask base(20, 20, 0), m85(20, 20, 0), m90(20, 20, 0);
  for (int p = 0; p < 100; ++p) base.values[p] = 1;
  for (int p = 0; p < 85; ++p) m85.values[p] = 1;
  for (int p = 0; p < 90; ++p) m90.values[p] = 1;
  write_triplet("c085", base, m85, base);
  write_triplet("c090", base, m90, base);

  // consistency 1
  write_triplet("c100", base, base, base);

  auto checks = cmd_dataset_check(ann.string(), (work / "check_out").string());
  bool rule_ok = checks.size() == 4;
  auto find = [&](const std::string& stem) -> const AnnotationCheck* {
    for (const auto& c : checks)
      if (c.stem == stem) return &c;
    return nullptr;
  };
  struct Expect {
    const char* stem;
    double c;
    bool included;
  } expectations[] = {{"c000", 0.0, false},
                      {"c085", 0.85, false},
                      {"c090", 0.9, true},
                      {"c100", 1.0, true}};
  for (const auto& e : expectations) {
    const AnnotationCheck* c = find(e.stem);
    rule_ok = rule_ok && c && std::fabs(c->consistency - e.c) < 1e-12 &&
              c->included == e.included;
  }

  bool vote_ok = true;
  Rng rng(90009);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<BinaryMask> masks = {random_mask(rng, 6, 6), random_mask(rng, 6, 6),
                                     random_mask(rng, 6, 6)};
    BinaryMask vote = majority_gt(masks);
    for (int p = 0; p < 36; ++p) {
      int s = masks[0].values[p] + masks[1].values[p] + masks[2].values[p];
      vote_ok = vote_ok && vote.values[p] == (s >= 2 ? 1 : 0);
    }
  }

  char detail[96];
  std::snprintf(detail, sizeof(detail), "cutoff rule %s, majority vote %s",
                rule_ok ? "ok" : "broken", vote_ok ? "matches oracle" : "broken");
  report(9, rule_ok && vote_ok, "annotation consistency and majority ground truth",
         detail);
}

// --------------------------------------------------------------- criterion 10
std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

void criterion_determinism(const fs::path& work) {
  fs::path data = work / "det_data";
  SynthOptions options;
  options.count = 20;
  options.seed = 71;
  synth_dataset(options, data.string());

  PipelineConfig config;
  config.seed = 71;
  config.levels = 3;
  config.finest_target = 60;
  config.coarsest_target = 15;
  config.input_side = 24;
  config.hidden = 48;
  config.epochs = 3;
  config.forest.n_trees = 15;
  config.crf.iterations = 3;
  config.split = {4, 1, 0};
  config.jobs = 0;

  fs::path b1 = work / "det_bundle1", b2 = work / "det_bundle2";
  cmd_train(data.string(), b1.string(), config);
  cmd_train(data.string(), b2.string(), config);
  bool bundles_equal = true;
  for (const char* name : {"bundle.json", "backbone.bin", "mlp.bin", "forest.bin"})
    bundles_equal = bundles_equal && slurp(b1 / name) == slurp(b2 / name);

  fs::path o1 = work / "det_out1", o2 = work / "det_out2";
  cmd_infer(data.string(), b1.string(), o1.string(), "hdhf", true, false, 0);
  cmd_infer(data.string(), b2.string(), o2.string(), "hdhf", true, false, 0);
  bool maps_equal = true;
  for (int i = 0; i < 20; ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "synth_%04d.png", i);
    maps_equal = maps_equal && slurp(o1 / name) == slurp(o2 / name);
  }

  // bundle round trip equals in-memory inference exactly
  ModelBundle loaded = load_bundle(b1.string());
  TrainReport fresh = cmd_train(data.string(), (work / "det_bundle3").string(), config);
  RasterImage img = load_image((data / "images" / "synth_0000.png").string());
  InferResult mem = infer_image(img, fresh.bundle, "hdhf", true, 1);
  InferResult disk = infer_image(img, loaded, "hdhf", true, 1);
  bool roundtrip = mem.final.values == disk.final.values;

  char detail[128];
  std::snprintf(detail, sizeof(detail), "bundles %s, maps %s, round trip %s",
                bundles_equal ? "identical" : "differ", maps_equal ? "identical" : "differ",
                roundtrip ? "exact" : "differs");
  report(10, bundles_equal && maps_equal && roundtrip,
         "seeded determinism and bundle persistence", detail);
}

}  // namespace

int main() {
  fs::path work = fs::temp_directory_path() / "sal_acceptance";
  fs::remove_all(work);
  fs::create_directories(work);

  criterion_gradients();
  criterion_crf_oracle();
  criterion_fusion();
  criterion_metrics();
  criterion_descriptor();
  criterion_segmentation();
  criterion_end_to_end(work);
  criterion_crf_usefulness();
  criterion_dataset_tooling(work);
  criterion_determinism(work);

  fs::remove_all(work);
  std::printf("%s: %d of 10 criteria failed\n", g_failures == 0 ? "SUCCESS" : "FAILURE",
              g_failures);
  return g_failures == 0 ? 0 : 1;
}
