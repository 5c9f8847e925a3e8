#include "sal/windows.hpp"

#include <algorithm>
#include <cmath>

#include "binio.hpp"
#include "sal/warp.hpp"

namespace sal {

namespace {

std::array<std::uint8_t, 3> round_rgb(const std::array<double, 3>& mean) {
  std::array<std::uint8_t, 3> out;
  for (int c = 0; c < 3; ++c)
    out[c] = static_cast<std::uint8_t>(std::clamp(std::lround(mean[c]), 0l, 255l));
  return out;
}

RasterImage crop(const RasterImage& img, const Box& box) {
  RasterImage out(box.width(), box.height());
  for (int y = 0; y < out.height; ++y)
    for (int x = 0; x < out.width; ++x) {
      const auto* p = img.px(box.min_x + x, box.min_y + y);
      out.set(x, y, p[0], p[1], p[2]);
    }
  return out;
}

void check_region(const Segmentation& seg, int r) {
  require(r >= 0 && r < seg.region_count(), "bad_region", "region id out of range");
  require(seg.regions[r].area > 0, "empty_region", "region has no pixels");
}

}  // namespace

Box region_box(const Segmentation& seg, int r) {
  check_region(seg, r);
  const Region& reg = seg.regions[r];
  return Box{reg.min_x, reg.min_y, reg.max_x, reg.max_y};
}

Box neighborhood_box(const Segmentation& seg, int r) {
  Box box = region_box(seg, r);
  if (seg.adjacency[r].empty()) return Box{0, 0, seg.width - 1, seg.height - 1};
  for (int n : seg.adjacency[r]) {
    Box nb = region_box(seg, n);
    box.min_x = std::min(box.min_x, nb.min_x);
    box.min_y = std::min(box.min_y, nb.min_y);
    box.max_x = std::max(box.max_x, nb.max_x);
    box.max_y = std::max(box.max_y, nb.max_y);
  }
  return box;
}

RasterImage masked_region_crop(const RasterImage& img, const Segmentation& seg, int r,
                               const std::array<double, 3>& mean_rgb) {
  Box box = region_box(seg, r);
  RasterImage out = crop(img, box);
  auto mean = round_rgb(mean_rgb);
  for (int y = 0; y < out.height; ++y)
    for (int x = 0; x < out.width; ++x)
      if (seg.labels[static_cast<std::size_t>(box.min_y + y) * seg.width + box.min_x + x] !=
          r)
        out.set(x, y, mean[0], mean[1], mean[2]);
  return out;
}

RasterImage neighborhood_crop(const RasterImage& img, const Segmentation& seg, int r) {
  return crop(img, neighborhood_box(seg, r));
}

RasterImage masked_full_image(const RasterImage& img, const Segmentation& seg, int r,
                              const std::array<double, 3>& mean_rgb) {
  check_region(seg, r);
  RasterImage out = img;
  auto mean = round_rgb(mean_rgb);
  for (int p : seg.regions[r].pixels) {
    auto* px = out.data.data() + 3 * static_cast<std::size_t>(p);
    px[0] = mean[0];
    px[1] = mean[1];
    px[2] = mean[2];
  }
  return out;
}

RasterImage window_a(const RasterImage& img, const Segmentation& seg, int r,
                     const std::array<double, 3>& mean_rgb, int input_side) {
  return warp_to_square(masked_region_crop(img, seg, r, mean_rgb), input_side);
}

RasterImage window_b(const RasterImage& img, const Segmentation& seg, int r,
                     int input_side) {
  return warp_to_square(neighborhood_crop(img, seg, r), input_side);
}

RasterImage window_c(const RasterImage& img, const Segmentation& seg, int r,
                     const std::array<double, 3>& mean_rgb, int input_side) {
  return warp_to_square(masked_full_image(img, seg, r, mean_rgb), input_side);
}

std::vector<double> s3cnn_extract(const RasterImage& img, const Segmentation& seg, int r,
                                  const Backbone& net) {
  const int side = net.spec.input_side;
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(3) * net.feature_dim());
  for (const RasterImage& win : {window_a(img, seg, r, net.spec.mean_rgb, side),
                                 window_b(img, seg, r, side),
                                 window_c(img, seg, r, net.spec.mean_rgb, side)}) {
    std::vector<double> f = backbone_forward(net, win);
    out.insert(out.end(), f.begin(), f.end());
  }
  return out;
}

void FeatureProvider::store(const std::string& image_id, int level, int region,
                            std::vector<double> features) {
  require(level >= 0 && level <= 0xff, "bad_key", "level must fit in u8");
  require(region >= 0 && region <= 0xffff, "bad_key", "region must fit in u16");
  if (dim_ == 0) dim_ = static_cast<int>(features.size());
  require(static_cast<int>(features.size()) == dim_, "dim_mismatch",
          "feature length does not match the provider dimension");
  records_[{image_id, level, region}] = std::move(features);
}

const std::vector<double>& FeatureProvider::fetch(const std::string& image_id, int level,
                                                  int region) const {
  auto it = records_.find({image_id, level, region});
  require(it != records_.end(), "missing_feature",
          "no stored feature for (" + image_id + ", " + std::to_string(level) + ", " +
              std::to_string(region) + ")");
  return it->second;
}

bool FeatureProvider::contains(const std::string& image_id, int level, int region) const {
  return records_.count({image_id, level, region}) > 0;
}

void FeatureProvider::save(const std::string& path) const {
  auto out = binio::open_out(path);
  nlohmann::json header;
  header["format"] = "features-v1";
  header["dim"] = dim_;
  header["count"] = records_.size();
  binio::write_header(out, header);
  for (const auto& [key, features] : records_) {
    const auto& [id, level, region] = key;
    binio::write_pod<std::uint16_t>(out, static_cast<std::uint16_t>(id.size()));
    binio::write_bytes(out, id.data(), id.size());
    binio::write_pod<std::uint8_t>(out, static_cast<std::uint8_t>(level));
    binio::write_pod<std::uint16_t>(out, static_cast<std::uint16_t>(region));
    binio::write_vec(out, features);
  }
  require(out.good(), "unwritable_file", "failed writing " + path);
}

FeatureProvider FeatureProvider::load(const std::string& path) {
  auto in = binio::open_in(path);
  nlohmann::json header = binio::read_header(in, "features-v1");
  FeatureProvider provider(header.at("dim").get<int>());
  auto count = header.at("count").get<std::uint64_t>();
  for (std::uint64_t i = 0; i < count; ++i) {
    auto idlen = binio::read_pod<std::uint16_t>(in);
    std::string id(idlen, '\0');
    binio::read_bytes(in, id.data(), idlen);
    int level = binio::read_pod<std::uint8_t>(in);
    int region = binio::read_pod<std::uint16_t>(in);
    provider.store(id, level, region,
                   binio::read_vec<double>(in, static_cast<std::size_t>(provider.dim())));
  }
  return provider;
}

}  // namespace sal
