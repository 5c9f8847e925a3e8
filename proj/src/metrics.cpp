#include "sal/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sal/lowlevel.hpp"

namespace sal {

namespace {

void check_pair(const SaliencyMap& map, const BinaryMask& gt) {
  require(map.width == gt.width && map.height == gt.height, "size_mismatch",
          "map and ground truth must share dimensions");
}

double f_measure(double precision, double recall, double beta2) {
  double denom = beta2 * precision + recall;
  if (denom == 0.0) return 0.0;
  return (1.0 + beta2) * precision * recall / denom;
}

}  // namespace

PrCurve pr_roc_single(const SaliencyMap& map, const BinaryMask& gt) {
  check_pair(map, gt);
  // Byte histograms split by ground-truth class; suffix sums give TP/FP per
  // threshold in one pass.
  std::array<long long, 256> pos_hist{}, neg_hist{};
  long long pos_total = 0, neg_total = 0;
  for (std::size_t p = 0; p < map.size(); ++p) {
    int byte = static_cast<int>(std::lround(map.values[p] * 255.0));
    byte = std::clamp(byte, 0, 255);
    if (gt.values[p]) {
      ++pos_hist[byte];
      ++pos_total;
    } else {
      ++neg_hist[byte];
      ++neg_total;
    }
  }
  PrCurve curve;
  long long tp = 0, fp = 0;
  for (int t = 255; t >= 0; --t) {
    tp += pos_hist[t];
    fp += neg_hist[t];
    PrPoint& pt = curve.points[t];
    pt.precision = (tp + fp) > 0 ? static_cast<double>(tp) / (tp + fp) : 1.0;
    pt.recall = pos_total > 0 ? static_cast<double>(tp) / pos_total : 1.0;
    pt.tpr = pt.recall;
    pt.fpr = neg_total > 0 ? static_cast<double>(fp) / neg_total : 0.0;
  }
  return curve;
}

PrCurve pr_roc(const std::vector<SaliencyMap>& maps, const std::vector<BinaryMask>& gts) {
  require(!maps.empty(), "empty_dataset", "no map/ground-truth pairs given");
  require(maps.size() == gts.size(), "size_mismatch", "map and ground-truth counts differ");
  PrCurve avg;
  for (auto& pt : avg.points) pt = {0.0, 0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < maps.size(); ++i) {
    PrCurve c = pr_roc_single(maps[i], gts[i]);
    for (int t = 0; t < 256; ++t) {
      avg.points[t].precision += c.points[t].precision;
      avg.points[t].recall += c.points[t].recall;
      avg.points[t].tpr += c.points[t].tpr;
      avg.points[t].fpr += c.points[t].fpr;
    }
  }
  double inv = 1.0 / static_cast<double>(maps.size());
  for (auto& pt : avg.points) {
    pt.precision *= inv;
    pt.recall *= inv;
    pt.tpr *= inv;
    pt.fpr *= inv;
  }
  return avg;
}

double auc(const PrCurve& curve) {
  std::vector<std::pair<double, double>> pts;
  pts.reserve(258);
  pts.emplace_back(0.0, 0.0);
  pts.emplace_back(1.0, 1.0);
  for (const auto& pt : curve.points) pts.emplace_back(pt.fpr, pt.tpr);
  std::sort(pts.begin(), pts.end());
  double area = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i)
    area += (pts[i].first - pts[i - 1].first) * 0.5 * (pts[i].second + pts[i - 1].second);
  return area;
}

double max_f(const PrCurve& curve, double beta2) {
  double best = 0.0;
  for (const auto& pt : curve.points)
    best = std::max(best, f_measure(pt.precision, pt.recall, beta2));
  return best;
}

AdaptivePrf adaptive_prf(const SaliencyMap& map, const BinaryMask& gt, double beta2) {
  check_pair(map, gt);
  double mean = 0.0;
  for (double v : map.values) mean += v;
  mean /= static_cast<double>(map.size());
  AdaptivePrf out;
  out.threshold = std::min(1.0, 2.0 * mean);

  long long tp = 0, fp = 0, fn = 0;
  for (std::size_t p = 0; p < map.size(); ++p) {
    bool pred = map.values[p] >= out.threshold;
    if (pred && gt.values[p])
      ++tp;
    else if (pred)
      ++fp;
    else if (gt.values[p])
      ++fn;
  }
  out.precision = (tp + fp) > 0 ? static_cast<double>(tp) / (tp + fp) : 1.0;
  out.recall = (tp + fn) > 0 ? static_cast<double>(tp) / (tp + fn) : 1.0;
  out.f = f_measure(out.precision, out.recall, beta2);
  return out;
}

double mae(const SaliencyMap& map, const BinaryMask& gt) {
  check_pair(map, gt);
  double acc = 0.0;
  for (std::size_t p = 0; p < map.size(); ++p)
    acc += std::fabs(map.values[p] - static_cast<double>(gt.values[p]));
  return acc / static_cast<double>(map.size());
}

double label_consistency(const std::vector<BinaryMask>& masks) {
  require(!masks.empty(), "empty_dataset", "need at least one mask");
  for (const auto& m : masks)
    require(m.width == masks[0].width && m.height == masks[0].height, "size_mismatch",
            "masks must share dimensions");
  long long inter = 0, uni = 0;
  for (std::size_t p = 0; p < masks[0].values.size(); ++p) {
    int all = 1, any = 0;
    for (const auto& m : masks) {
      all &= m.values[p];
      any |= m.values[p];
    }
    inter += all;
    uni += any;
  }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

BinaryMask majority_gt(const std::vector<BinaryMask>& masks) {
  require(masks.size() == 3, "bad_count", "majority vote is defined for three annotators");
  for (const auto& m : masks)
    require(m.width == masks[0].width && m.height == masks[0].height, "size_mismatch",
            "masks must share dimensions");
  BinaryMask out(masks[0].width, masks[0].height);
  for (std::size_t p = 0; p < out.values.size(); ++p) {
    int votes = masks[0].values[p] + masks[1].values[p] + masks[2].values[p];
    out.values[p] = votes >= 2 ? 1 : 0;
  }
  return out;
}

namespace {

// Euclidean-disk dilation by stamping the offset set of radius r.
std::vector<std::uint8_t> dilate_disk(const std::vector<std::uint8_t>& inside, int w, int h,
                                      int radius) {
  std::vector<std::pair<int, int>> offsets;
  for (int dy = -radius; dy <= radius; ++dy)
    for (int dx = -radius; dx <= radius; ++dx)
      if (dx * dx + dy * dy <= radius * radius) offsets.emplace_back(dx, dy);
  std::vector<std::uint8_t> out(inside.size(), 0);
  for (int p = 0; p < w * h; ++p) {
    if (!inside[p]) continue;
    int x = p % w, y = p / w;
    for (auto [dx, dy] : offsets) {
      int nx = x + dx, ny = y + dy;
      if (nx >= 0 && nx < w && ny >= 0 && ny < h)
        out[static_cast<std::size_t>(ny) * w + nx] = 1;
    }
  }
  return out;
}

std::vector<std::array<double, 3>> gather_rgb(const RasterImage& img,
                                              const std::vector<int>& pixels) {
  std::vector<std::array<double, 3>> out;
  out.reserve(pixels.size());
  for (int p : pixels) {
    const auto* px = img.data.data() + 3 * static_cast<std::size_t>(p);
    out.push_back({static_cast<double>(px[0]), static_cast<double>(px[1]),
                   static_cast<double>(px[2])});
  }
  return out;
}

}  // namespace

ColorContrastReport color_contrast_criterion(const RasterImage& img, const BinaryMask& gt,
                                             int dilation_radius) {
  require(img.width == gt.width && img.height == gt.height, "size_mismatch",
          "image and ground truth must share dimensions");
  require(gt.count() > 0, "empty_gt", "ground truth has no salient pixels");
  const int w = gt.width, h = gt.height;

  // 4-connected components of the salient mask.
  std::vector<int> component(static_cast<std::size_t>(w) * h, -1);
  std::vector<std::vector<int>> members;
  std::vector<int> stack;
  for (int start = 0; start < w * h; ++start) {
    if (!gt.values[start] || component[start] != -1) continue;
    int id = static_cast<int>(members.size());
    members.emplace_back();
    component[start] = id;
    stack.push_back(start);
    while (!stack.empty()) {
      int p = stack.back();
      stack.pop_back();
      members[id].push_back(p);
      int x = p % w, y = p / w;
      const int nx[4] = {x - 1, x + 1, x, x};
      const int ny[4] = {y, y, y - 1, y + 1};
      for (int d = 0; d < 4; ++d) {
        if (nx[d] < 0 || nx[d] >= w || ny[d] < 0 || ny[d] >= h) continue;
        int q = ny[d] * w + nx[d];
        if (gt.values[q] && component[q] == -1) {
          component[q] = id;
          stack.push_back(q);
        }
      }
    }
  }

  ColorContrastReport report;
  report.component_count = static_cast<int>(members.size());
  for (int x = 0; x < w && !report.touches_boundary; ++x)
    report.touches_boundary = gt.values[x] || gt.values[static_cast<std::size_t>(h - 1) * w + x];
  for (int y = 0; y < h && !report.touches_boundary; ++y)
    report.touches_boundary =
        gt.values[static_cast<std::size_t>(y) * w] || gt.values[static_cast<std::size_t>(y) * w + w - 1];

  double min_chi = std::numeric_limits<double>::infinity();
  std::vector<std::uint8_t> inside(static_cast<std::size_t>(w) * h);
  for (const auto& comp : members) {
    std::fill(inside.begin(), inside.end(), 0);
    for (int p : comp) inside[p] = 1;
    std::vector<std::uint8_t> dilated = dilate_disk(inside, w, h, dilation_radius);
    std::vector<int> ring;
    for (int p = 0; p < w * h; ++p)
      if (!inside[p] && dilated[p]) ring.push_back(p);
    Histogram hc = color_histogram(gather_rgb(img, comp), ColorSpace::Rgb);
    Histogram hr = color_histogram(gather_rgb(img, ring), ColorSpace::Rgb);
    min_chi = std::min(min_chi, chi_square(hc, hr));
  }
  report.min_chi_square = min_chi;
  return report;
}

}  // namespace sal
