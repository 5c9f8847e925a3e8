#ifndef SAL_WINDOWS_HPP
#define SAL_WINDOWS_HPP

#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "sal/backbone.hpp"
#include "sal/image.hpp"
#include "sal/segmentation.hpp"

namespace sal {

struct Box {
  int min_x = 0, min_y = 0, max_x = 0, max_y = 0;  // inclusive
  int width() const { return max_x - min_x + 1; }
  int height() const { return max_y - min_y + 1; }
  bool contains(const Box& other) const {
    return min_x <= other.min_x && min_y <= other.min_y && max_x >= other.max_x &&
           max_y >= other.max_y;
  }
};

Box region_box(const Segmentation& seg, int r);
// Union box of the region and its immediate neighbors (whole image when the
// region has no neighbors).
Box neighborhood_box(const Segmentation& seg, int r);

// The three nested windows, before warping. Masked pixels carry mean_rgb
// rounded to 8 bits.
RasterImage masked_region_crop(const RasterImage& img, const Segmentation& seg, int r,
                               const std::array<double, 3>& mean_rgb);
RasterImage neighborhood_crop(const RasterImage& img, const Segmentation& seg, int r);
RasterImage masked_full_image(const RasterImage& img, const Segmentation& seg, int r,
                              const std::array<double, 3>& mean_rgb);

RasterImage window_a(const RasterImage& img, const Segmentation& seg, int r,
                     const std::array<double, 3>& mean_rgb, int input_side);
RasterImage window_b(const RasterImage& img, const Segmentation& seg, int r,
                     int input_side);
RasterImage window_c(const RasterImage& img, const Segmentation& seg, int r,
                     const std::array<double, 3>& mean_rgb, int input_side);

// Concatenated backbone features of windows A, B and C, in that order.
std::vector<double> s3cnn_extract(const RasterImage& img, const Segmentation& seg, int r,
                                  const Backbone& net);

// Lookup of externally computed region features keyed by
// (image id, level, region). Levels fit u8 and regions u16 on disk.
class FeatureProvider {
 public:
  explicit FeatureProvider(int dim = 0) : dim_(dim) {}

  int dim() const { return dim_; }
  std::size_t size() const { return records_.size(); }

  void store(const std::string& image_id, int level, int region,
             std::vector<double> features);
  const std::vector<double>& fetch(const std::string& image_id, int level,
                                   int region) const;
  bool contains(const std::string& image_id, int level, int region) const;

  void save(const std::string& path) const;
  static FeatureProvider load(const std::string& path);

 private:
  using Key = std::tuple<std::string, int, int>;
  int dim_;
  std::map<Key, std::vector<double>> records_;
};

}  // namespace sal

#endif
