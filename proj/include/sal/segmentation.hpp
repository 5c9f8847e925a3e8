#ifndef SAL_SEGMENTATION_HPP
#define SAL_SEGMENTATION_HPP

#include <string>
#include <vector>

#include "sal/image.hpp"

namespace sal {

struct Region {
  std::vector<int> pixels;  // linear indices, row-major order
  int min_x = 0, min_y = 0, max_x = 0, max_y = 0;
  int area = 0;
};

// One decomposition level: a dense-labelled partition with region metadata.
// Regions are 4-connected; adjacency is symmetric and self-free.
struct Segmentation {
  int level = 1;
  int width = 0;
  int height = 0;
  std::vector<int> labels;
  std::vector<Region> regions;
  std::vector<std::vector<int>> adjacency;
  double k = 0.0;
  int min_size = 0;

  int region_count() const { return static_cast<int>(regions.size()); }
};

struct SegmentationStack {
  std::vector<Segmentation> levels;  // finest to coarsest
};

// Pre-smoothed pixel graph shared across parameter sweeps of one image.
// Edges are sorted by (weight, source, target) for deterministic merging.
struct PixelGraph {
  int width = 0;
  int height = 0;
  struct Edge {
    float w;
    int a;
    int b;
  };
  std::vector<Edge> edges;
};

PixelGraph build_pixel_graph(const RasterImage& img, double sigma = 0.8);

// Felzenszwalb-Huttenlocher segmentation on the 8-connected grid, followed
// by a min-size merge pass and a relabel into 4-connected regions.
Segmentation segment_graph(const PixelGraph& graph, double k, int min_size);
Segmentation graph_segment(const RasterImage& img, double k, int min_size,
                           double sigma = 0.8);

// Recomputes 4-neighbor region adjacency from the label grid.
std::vector<std::vector<int>> region_adjacency(const Segmentation& seg);

// Rebuilds full region metadata from a dense label grid.
Segmentation segmentation_from_labels(std::vector<int> labels, int width, int height,
                                      int level = 1);

// Region-count target for one level of the geometric series.
int level_region_target(int levels, int finest_target, int coarsest_target, int level);

// M levels with geometric region-count targets between finest_target and
// coarsest_target; per level, k is found by bisection until the count lands
// within +-30% of the target or 12 steps elapse.
SegmentationStack build_stack(const RasterImage& img, int levels, int finest_target,
                              int coarsest_target, double sigma = 0.8, int jobs = 1);

// 16-bit label PNG plus a JSON sidecar ("<path>.json") with level and params.
void save_segmentation(const Segmentation& seg, const std::string& png_path);
Segmentation load_segmentation(const std::string& png_path);

}  // namespace sal

#endif
