#include "sal/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "sal/parallel.hpp"
#include "sal/png_io.hpp"

namespace sal {

namespace {

// Disjoint-set forest with union by rank and component sizes.
class Universe {
 public:
  explicit Universe(int n) : parent_(n), rank_(n, 0), size_(n, 1) {
    for (int i = 0; i < n; ++i) parent_[i] = i;
  }
  int find(int x) {
    int root = x;
    while (parent_[root] != root) root = parent_[root];
    while (parent_[x] != root) {
      int next = parent_[x];
      parent_[x] = root;
      x = next;
    }
    return root;
  }
  int join(int a, int b) {
    if (rank_[a] < rank_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    if (rank_[a] == rank_[b]) ++rank_[a];
    return a;
  }
  int size(int a) const { return size_[a]; }

 private:
  std::vector<int> parent_;
  std::vector<int> rank_;
  std::vector<int> size_;
};

std::vector<float> smooth_plane(const std::vector<float>& src, int w, int h, double sigma) {
  int half = std::max(1, static_cast<int>(std::ceil(sigma * 4.0)));
  std::vector<double> kernel(half + 1);
  double sum = 0.0;
  for (int i = 0; i <= half; ++i) {
    kernel[i] = std::exp(-0.5 * (i / sigma) * (i / sigma));
    sum += i == 0 ? kernel[i] : 2.0 * kernel[i];
  }
  for (auto& v : kernel) v /= sum;

  auto clampi = [](int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); };
  std::vector<float> tmp(src.size()), out(src.size());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = kernel[0] * src[y * w + x];
      for (int i = 1; i <= half; ++i)
        acc += kernel[i] * (src[y * w + clampi(x - i, 0, w - 1)] +
                            src[y * w + clampi(x + i, 0, w - 1)]);
      tmp[y * w + x] = static_cast<float>(acc);
    }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = kernel[0] * tmp[y * w + x];
      for (int i = 1; i <= half; ++i)
        acc += kernel[i] * (tmp[clampi(y - i, 0, h - 1) * w + x] +
                            tmp[clampi(y + i, 0, h - 1) * w + x]);
      out[y * w + x] = static_cast<float>(acc);
    }
  return out;
}

// Relabels union-find roots into dense ids over 4-connected components and
// fills region metadata. Ids are assigned in row-major first-encounter order.
Segmentation finalize(const PixelGraph& graph, Universe& uf, double k, int min_size) {
  const int w = graph.width, h = graph.height, n = w * h;
  Segmentation seg;
  seg.width = w;
  seg.height = h;
  seg.k = k;
  seg.min_size = min_size;
  seg.labels.assign(n, -1);

  std::vector<int> stack;
  int next_id = 0;
  for (int start = 0; start < n; ++start) {
    if (seg.labels[start] != -1) continue;
    int root = uf.find(start);
    int id = next_id++;
    seg.labels[start] = id;
    stack.push_back(start);
    while (!stack.empty()) {
      int p = stack.back();
      stack.pop_back();
      int x = p % w, y = p / w;
      const int nx[4] = {x - 1, x + 1, x, x};
      const int ny[4] = {y, y, y - 1, y + 1};
      for (int d = 0; d < 4; ++d) {
        if (nx[d] < 0 || nx[d] >= w || ny[d] < 0 || ny[d] >= h) continue;
        int q = ny[d] * w + nx[d];
        if (seg.labels[q] == -1 && uf.find(q) == root) {
          seg.labels[q] = id;
          stack.push_back(q);
        }
      }
    }
  }

  seg.regions.resize(next_id);
  for (auto& r : seg.regions) {
    r.min_x = w;
    r.min_y = h;
    r.max_x = -1;
    r.max_y = -1;
  }
  for (int p = 0; p < n; ++p) {
    Region& r = seg.regions[seg.labels[p]];
    int x = p % w, y = p / w;
    r.pixels.push_back(p);
    ++r.area;
    r.min_x = std::min(r.min_x, x);
    r.max_x = std::max(r.max_x, x);
    r.min_y = std::min(r.min_y, y);
    r.max_y = std::max(r.max_y, y);
  }
  seg.adjacency = region_adjacency(seg);
  return seg;
}

}  // namespace

PixelGraph build_pixel_graph(const RasterImage& img, double sigma) {
  require(!img.empty(), "empty_image", "cannot segment an empty image");
  const int w = img.width, h = img.height;
  std::vector<float> planes[3];
  for (int c = 0; c < 3; ++c) {
    std::vector<float> p(static_cast<std::size_t>(w) * h);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) p[y * w + x] = img.px(x, y)[c];
    planes[c] = sigma > 0.0 ? smooth_plane(p, w, h, sigma) : std::move(p);
  }

  auto diff = [&](int a, int b) {
    double d0 = planes[0][a] - planes[0][b];
    double d1 = planes[1][a] - planes[1][b];
    double d2 = planes[2][a] - planes[2][b];
    return static_cast<float>(std::sqrt(d0 * d0 + d1 * d1 + d2 * d2));
  };

  PixelGraph graph;
  graph.width = w;
  graph.height = h;
  graph.edges.reserve(static_cast<std::size_t>(4) * w * h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      int p = y * w + x;
      if (x < w - 1) graph.edges.push_back({diff(p, p + 1), p, p + 1});
      if (y < h - 1) graph.edges.push_back({diff(p, p + w), p, p + w});
      if (x < w - 1 && y < h - 1) graph.edges.push_back({diff(p, p + w + 1), p, p + w + 1});
      if (x < w - 1 && y > 0) graph.edges.push_back({diff(p, p - w + 1), p, p - w + 1});
    }
  std::sort(graph.edges.begin(), graph.edges.end(), [](const auto& e1, const auto& e2) {
    if (e1.w != e2.w) return e1.w < e2.w;
    if (e1.a != e2.a) return e1.a < e2.a;
    return e1.b < e2.b;
  });
  return graph;
}

Segmentation segment_graph(const PixelGraph& graph, double k, int min_size) {
  require(k > 0.0, "bad_param", "k must be positive");
  require(min_size >= 1, "bad_param", "min_size must be >= 1");
  const int n = graph.width * graph.height;
  Universe uf(n);
  // Per-component merge threshold Int(C) + k/|C|.
  std::vector<double> threshold(n, k);
  for (const auto& e : graph.edges) {
    int a = uf.find(e.a);
    int b = uf.find(e.b);
    if (a == b) continue;
    if (e.w <= threshold[a] && e.w <= threshold[b]) {
      int r = uf.join(a, b);
      threshold[r] = e.w + k / uf.size(r);
    }
  }
  // Merge components below min_size.
  for (const auto& e : graph.edges) {
    int a = uf.find(e.a);
    int b = uf.find(e.b);
    if (a != b && (uf.size(a) < min_size || uf.size(b) < min_size)) uf.join(a, b);
  }
  return finalize(graph, uf, k, min_size);
}

Segmentation graph_segment(const RasterImage& img, double k, int min_size, double sigma) {
  return segment_graph(build_pixel_graph(img, sigma), k, min_size);
}

std::vector<std::vector<int>> region_adjacency(const Segmentation& seg) {
  const int w = seg.width, h = seg.height;
  std::vector<std::vector<int>> adj(seg.regions.size());
  auto link = [&](int a, int b) {
    if (a == b) return;
    adj[a].push_back(b);
    adj[b].push_back(a);
  };
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      int l = seg.labels[y * w + x];
      if (x < w - 1) link(l, seg.labels[y * w + x + 1]);
      if (y < h - 1) link(l, seg.labels[(y + 1) * w + x]);
    }
  for (auto& v : adj) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }
  return adj;
}

Segmentation segmentation_from_labels(std::vector<int> labels, int width, int height,
                                      int level) {
  require(labels.size() == static_cast<std::size_t>(width) * height, "bad_labels",
          "label grid size mismatch");
  int n = 0;
  for (int l : labels) {
    require(l >= 0, "bad_labels", "labels must be non-negative");
    n = std::max(n, l + 1);
  }
  Segmentation seg;
  seg.level = level;
  seg.width = width;
  seg.height = height;
  seg.labels = std::move(labels);
  seg.regions.resize(n);
  for (auto& r : seg.regions) {
    r.min_x = width;
    r.min_y = height;
    r.max_x = -1;
    r.max_y = -1;
  }
  for (int p = 0; p < width * height; ++p) {
    Region& r = seg.regions[seg.labels[p]];
    int x = p % width, y = p / width;
    r.pixels.push_back(p);
    ++r.area;
    r.min_x = std::min(r.min_x, x);
    r.max_x = std::max(r.max_x, x);
    r.min_y = std::min(r.min_y, y);
    r.max_y = std::max(r.max_y, y);
  }
  for (const auto& r : seg.regions)
    require(r.area > 0, "bad_labels", "region ids must be dense");
  seg.adjacency = region_adjacency(seg);
  return seg;
}

int level_region_target(int levels, int finest_target, int coarsest_target, int level) {
  double t = levels == 1 ? 0.0 : static_cast<double>(level - 1) / (levels - 1);
  int target = static_cast<int>(std::lround(
      finest_target * std::pow(static_cast<double>(coarsest_target) / finest_target, t)));
  return std::max(1, target);
}

SegmentationStack build_stack(const RasterImage& img, int levels, int finest_target,
                              int coarsest_target, double sigma, int jobs) {
  require(levels >= 1, "bad_param", "level count must be >= 1");
  require(finest_target > 0 && coarsest_target > 0, "bad_param", "targets must be positive");
  require(finest_target >= coarsest_target, "bad_param",
          "finest target must be >= coarsest target");

  PixelGraph graph = build_pixel_graph(img, sigma);
  const double area = static_cast<double>(img.width) * img.height;

  SegmentationStack stack;
  stack.levels.resize(levels);
  parallel_for(static_cast<std::size_t>(levels), jobs, [&](std::size_t i) {
    int target = level_region_target(levels, finest_target, coarsest_target,
                                     static_cast<int>(i) + 1);
    int min_size = std::max<int>(20, static_cast<int>(std::lround(area / (10.0 * target))));

    double lo = 1e-2, hi = 1e7;
    Segmentation best;
    double best_dist = -1.0;
    for (int step = 0; step < 12; ++step) {
      double k = std::sqrt(lo * hi);
      Segmentation seg = segment_graph(graph, k, min_size);
      int count = seg.region_count();
      double dist = std::fabs(std::log(static_cast<double>(count) / target));
      if (best_dist < 0.0 || dist < best_dist) {
        best_dist = dist;
        best = std::move(seg);
      }
      if (count >= 0.7 * target && count <= 1.3 * target) break;
      if (count > target)
        lo = k;  // merge more aggressively
      else
        hi = k;
    }
    best.level = static_cast<int>(i) + 1;
    stack.levels[i] = std::move(best);
  });

  // Best-effort targets can invert the ordering on hard images; fall back to
  // the previous level so counts stay weakly decreasing.
  for (int i = 1; i < levels; ++i) {
    if (stack.levels[i].region_count() > stack.levels[i - 1].region_count()) {
      stack.levels[i] = stack.levels[i - 1];
      stack.levels[i].level = i + 1;
    }
  }
  return stack;
}

void save_segmentation(const Segmentation& seg, const std::string& png_path) {
  save_labels16(seg.labels, seg.width, seg.height, png_path);
  nlohmann::json meta;
  meta["level"] = seg.level;
  meta["N"] = seg.region_count();
  meta["params"] = {{"k", seg.k}, {"min_size", seg.min_size}};
  std::ofstream out(png_path + ".json");
  require(out.good(), "unwritable_file", "cannot write " + png_path + ".json");
  out << meta.dump(2) << "\n";
}

Segmentation load_segmentation(const std::string& png_path) {
  int w = 0, h = 0;
  std::vector<int> labels = load_labels16(png_path, w, h);

  std::ifstream in(png_path + ".json");
  require(in.good(), "unreadable_file", "cannot read " + png_path + ".json");
  nlohmann::json meta = nlohmann::json::parse(in);

  Segmentation seg = segmentation_from_labels(std::move(labels), w, h,
                                              meta.at("level").get<int>());
  require(meta.at("N").get<int>() == seg.region_count(), "bad_labels",
          "sidecar N does not match label grid");
  seg.k = meta.at("params").at("k").get<double>();
  seg.min_size = meta.at("params").at("min_size").get<int>();
  return seg;
}

}  // namespace sal
