#include "sal/lowlevel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "sal/color.hpp"
#include "sal/parallel.hpp"

namespace sal {

PseudoBackground pseudo_background(const SaliencyMap& init, int border, double thresh) {
  const int w = init.width, h = init.height;
  PseudoBackground bg;
  bg.mask = BinaryMask(w, h, 0);
  auto in_band = [&](int x, int y) {
    return x < border || y < border || x >= w - border || y >= h - border;
  };
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (in_band(x, y) && init.at(x, y) < thresh) bg.mask.at(x, y) = 1;
  if (bg.mask.count() == 0) {
    bg.fallback = true;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        if (in_band(x, y)) bg.mask.at(x, y) = 1;
  }
  for (int p = 0; p < w * h; ++p)
    if (bg.mask.values[p]) bg.pixels.push_back(p);
  return bg;
}

namespace {

int channel_bin(double v, ColorSpace space, int channel, int bins) {
  double t;
  switch (space) {
    case ColorSpace::Rgb:
      t = v / 256.0;
      break;
    case ColorSpace::Lab:
      t = channel == 0 ? v / 100.0 : (v + 128.0) / 256.0;
      break;
    case ColorSpace::Hsv:
      t = v;
      break;
    default:
      t = 0.0;
  }
  int b = static_cast<int>(std::floor(t * bins));
  return std::clamp(b, 0, bins - 1);
}

void normalize_l1(Histogram& h) {
  double sum = 0.0;
  for (double v : h.bins) sum += v;
  if (sum > 0.0)
    for (double& v : h.bins) v /= sum;
}

}  // namespace

Histogram color_histogram(const std::vector<std::array<double, 3>>& pixels,
                          ColorSpace space, int bins_per_channel) {
  Histogram h;
  h.bins.assign(static_cast<std::size_t>(bins_per_channel) * bins_per_channel *
                    bins_per_channel,
                0.0);
  for (const auto& p : pixels) {
    int b0 = channel_bin(p[0], space, 0, bins_per_channel);
    int b1 = channel_bin(p[1], space, 1, bins_per_channel);
    int b2 = channel_bin(p[2], space, 2, bins_per_channel);
    h.bins[(static_cast<std::size_t>(b0) * bins_per_channel + b1) * bins_per_channel + b2] +=
        1.0;
  }
  normalize_l1(h);
  return h;
}

double chi_square(const Histogram& h1, const Histogram& h2) {
  require(h1.bins.size() == h2.bins.size(), "bin_mismatch",
          "chi_square requires equal bin counts");
  double acc = 0.0;
  for (std::size_t i = 0; i < h1.bins.size(); ++i) {
    double s = h1.bins[i] + h2.bins[i];
    if (s > 0.0) {
      double d = h1.bins[i] - h2.bins[i];
      acc += d * d / s;
    }
  }
  return 0.5 * acc;
}

namespace {

constexpr int kLmHalf = LmFilterBank::kSupport / 2;

std::vector<double> make_lm_kernel(double sigma_x, double sigma_y, int deriv_y,
                                   double angle) {
  const int sup = LmFilterBank::kSupport;
  std::vector<double> k(static_cast<std::size_t>(sup) * sup);
  double c = std::cos(angle), s = std::sin(angle);
  for (int y = -kLmHalf; y <= kLmHalf; ++y)
    for (int x = -kLmHalf; x <= kLmHalf; ++x) {
      // Rotate the sampling grid; elongated axis along the orientation.
      double rx = c * x - s * y;
      double ry = s * x + c * y;
      double gx = std::exp(-0.5 * rx * rx / (sigma_x * sigma_x));
      double gy = std::exp(-0.5 * ry * ry / (sigma_y * sigma_y));
      double v = gx * gy;
      if (deriv_y == 1) v *= -ry / (sigma_y * sigma_y);
      if (deriv_y == 2) v *= (ry * ry / (sigma_y * sigma_y) - 1.0) / (sigma_y * sigma_y);
      k[(y + kLmHalf) * sup + (x + kLmHalf)] = v;
    }
  return k;
}

std::vector<double> make_gaussian_kernel(double sigma) {
  const int sup = LmFilterBank::kSupport;
  std::vector<double> k(static_cast<std::size_t>(sup) * sup);
  for (int y = -kLmHalf; y <= kLmHalf; ++y)
    for (int x = -kLmHalf; x <= kLmHalf; ++x)
      k[(y + kLmHalf) * sup + (x + kLmHalf)] =
          std::exp(-0.5 * (x * x + y * y) / (sigma * sigma));
  return k;
}

std::vector<double> make_log_kernel(double sigma) {
  const int sup = LmFilterBank::kSupport;
  std::vector<double> k(static_cast<std::size_t>(sup) * sup);
  for (int y = -kLmHalf; y <= kLmHalf; ++y)
    for (int x = -kLmHalf; x <= kLmHalf; ++x) {
      double r2 = x * x + y * y;
      double s2 = sigma * sigma;
      k[(y + kLmHalf) * sup + (x + kLmHalf)] =
          (r2 / (2.0 * s2) - 1.0) / s2 * std::exp(-0.5 * r2 / s2);
    }
  return k;
}

// Zero mean, unit L1 norm. Makes every filter reject constants, so a constant
// image ties all responses at zero and the lowest-index rule applies.
void normalize_filter(std::vector<double>& k) {
  double mean = 0.0;
  for (double v : k) mean += v;
  mean /= static_cast<double>(k.size());
  double l1 = 0.0;
  for (double& v : k) {
    v -= mean;
    l1 += std::fabs(v);
  }
  if (l1 > 0.0)
    for (double& v : k) v /= l1;
}

}  // namespace

const LmFilterBank& lm_filter_bank() {
  static const LmFilterBank bank = [] {
    LmFilterBank b;
    const double scales[3] = {1.0, std::numbers::sqrt2, 2.0};
    for (double sigma : scales)
      for (int orient = 0; orient < 6; ++orient) {
        double angle = std::numbers::pi * orient / 6.0;
        b.kernels.push_back(make_lm_kernel(3.0 * sigma, sigma, 1, angle));  // edge
        b.kernels.push_back(make_lm_kernel(3.0 * sigma, sigma, 2, angle));  // bar
      }
    for (int i = 0; i < 8; ++i)
      b.kernels.push_back(make_gaussian_kernel(std::pow(std::numbers::sqrt2, i)));
    const double log_scales[4] = {1.0, std::numbers::sqrt2, 2.0, 2.0 * std::numbers::sqrt2};
    for (double sigma : log_scales) b.kernels.push_back(make_log_kernel(sigma));
    for (auto& k : b.kernels) normalize_filter(k);
    return b;
  }();
  return bank;
}

std::vector<std::uint8_t> lm_argmax_map(const PlanarImage& gray, int jobs) {
  const int w = gray.width, h = gray.height;
  const auto& bank = lm_filter_bank();
  const int sup = LmFilterBank::kSupport;

  // Replicate-pad once so the convolution loop is branch-free.
  const int pw = w + 2 * kLmHalf, ph = h + 2 * kLmHalf;
  std::vector<double> padded(static_cast<std::size_t>(pw) * ph);
  for (int y = 0; y < ph; ++y) {
    int sy = std::clamp(y - kLmHalf, 0, h - 1);
    for (int x = 0; x < pw; ++x) {
      int sx = std::clamp(x - kLmHalf, 0, w - 1);
      padded[static_cast<std::size_t>(y) * pw + x] = gray.at(0, sx, sy);
    }
  }

  std::vector<double> best(static_cast<std::size_t>(w) * h,
                           -1.0);  // strictly-greater replacement keeps low-index ties
  std::vector<std::uint8_t> index(static_cast<std::size_t>(w) * h, 0);

  for (int f = 0; f < LmFilterBank::kFilters; ++f) {
    const double* kern = bank.kernels[f].data();
    parallel_for(static_cast<std::size_t>(h), jobs, [&](std::size_t y) {
      for (int x = 0; x < w; ++x) {
        double acc = 0.0;
        const double* base =
            padded.data() + static_cast<std::size_t>(y) * pw + x;
        for (int ky = 0; ky < sup; ++ky) {
          const double* row = base + static_cast<std::size_t>(ky) * pw;
          const double* krow = kern + static_cast<std::size_t>(ky) * sup;
          for (int kx = 0; kx < sup; ++kx) acc += row[kx] * krow[kx];
        }
        // Zero-mean filters respond O(1e-11) on constant fields purely from
        // rounding; snap those to an exact tie so the lowest index wins.
        double mag = std::fabs(acc);
        if (mag < 1e-9) mag = 0.0;
        std::size_t p = y * w + x;
        if (mag > best[p]) {
          best[p] = mag;
          index[p] = static_cast<std::uint8_t>(f);
        }
      }
    });
  }
  return index;
}

std::vector<std::uint8_t> lbp_code_map(const PlanarImage& gray) {
  const int w = gray.width, h = gray.height;
  // Clockwise from the top-left neighbor.
  const int dx[8] = {-1, 0, 1, 1, 1, 0, -1, -1};
  const int dy[8] = {-1, -1, -1, 0, 1, 1, 1, 0};
  std::vector<std::uint8_t> codes(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double center = gray.at(0, x, y);
      unsigned code = 0;
      for (int i = 0; i < 8; ++i) {
        int nx = std::clamp(x + dx[i], 0, w - 1);
        int ny = std::clamp(y + dy[i], 0, h - 1);
        code = (code << 1) | (gray.at(0, nx, ny) >= center ? 1u : 0u);
      }
      codes[static_cast<std::size_t>(y) * w + x] = static_cast<std::uint8_t>(code);
    }
  return codes;
}

Histogram histogram_of_indices(const std::vector<std::uint8_t>& index_map,
                               const std::vector<int>& pixels, int bin_count) {
  Histogram h;
  h.bins.assign(bin_count, 0.0);
  for (int p : pixels) h.bins[index_map[p]] += 1.0;
  normalize_l1(h);
  return h;
}

Histogram lm_max_response_histogram(const PlanarImage& gray, const std::vector<int>& pixels) {
  return histogram_of_indices(lm_argmax_map(gray), pixels, LmFilterBank::kFilters);
}

Histogram lbp_histogram(const PlanarImage& gray, const std::vector<int>& pixels) {
  return histogram_of_indices(lbp_code_map(gray), pixels, 256);
}

ImageFeatures compute_image_features(const RasterImage& img, int jobs) {
  ImageFeatures f;
  f.width = img.width;
  f.height = img.height;
  f.rgb = &img;
  f.lab = rgb_to_lab(img);
  f.hsv = rgb_to_hsv(img);
  f.gray = to_grayscale(img);
  f.lm_index = lm_argmax_map(f.gray, jobs);
  f.lbp_code = lbp_code_map(f.gray);
  return f;
}

PixelSetStats pixel_set_stats(const ImageFeatures& feat, const std::vector<int>& pixels) {
  PixelSetStats st;
  const int w = feat.width;
  std::array<double, 9> sum{}, sumsq{};
  std::vector<std::array<double, 3>> rgb_vals, lab_vals, hsv_vals;
  rgb_vals.reserve(pixels.size());
  lab_vals.reserve(pixels.size());
  hsv_vals.reserve(pixels.size());
  for (int p : pixels) {
    int x = p % w, y = p / w;
    const auto* px = feat.rgb->px(x, y);
    std::array<double, 3> rgb{static_cast<double>(px[0]), static_cast<double>(px[1]),
                              static_cast<double>(px[2])};
    std::array<double, 3> lab{feat.lab.at(0, x, y), feat.lab.at(1, x, y),
                              feat.lab.at(2, x, y)};
    std::array<double, 3> hsv{feat.hsv.at(0, x, y), feat.hsv.at(1, x, y),
                              feat.hsv.at(2, x, y)};
    for (int c = 0; c < 3; ++c) {
      sum[c] += rgb[c];
      sumsq[c] += rgb[c] * rgb[c];
      sum[3 + c] += lab[c];
      sumsq[3 + c] += lab[c] * lab[c];
      sum[6 + c] += hsv[c];
      sumsq[6 + c] += hsv[c] * hsv[c];
    }
    rgb_vals.push_back(rgb);
    lab_vals.push_back(lab);
    hsv_vals.push_back(hsv);
  }
  double n = static_cast<double>(pixels.size());
  if (n > 0) {
    for (int c = 0; c < 3; ++c) {
      st.mean_rgb[c] = sum[c] / n;
      st.mean_lab[c] = sum[3 + c] / n;
      st.mean_hsv[c] = sum[6 + c] / n;
      // Population variance; clamp tiny negative rounding away.
      st.var_rgb[c] = std::max(0.0, sumsq[c] / n - st.mean_rgb[c] * st.mean_rgb[c]);
      st.var_lab[c] = std::max(0.0, sumsq[3 + c] / n - st.mean_lab[c] * st.mean_lab[c]);
      st.var_hsv[c] = std::max(0.0, sumsq[6 + c] / n - st.mean_hsv[c] * st.mean_hsv[c]);
    }
  }
  st.h_rgb = color_histogram(rgb_vals, ColorSpace::Rgb);
  st.h_lab = color_histogram(lab_vals, ColorSpace::Lab);
  st.h_hsv = color_histogram(hsv_vals, ColorSpace::Hsv);
  st.h_lm = histogram_of_indices(feat.lm_index, pixels, LmFilterBank::kFilters);
  st.h_lbp = histogram_of_indices(feat.lbp_code, pixels, 256);
  return st;
}

int region_perimeter(const Segmentation& seg, int r) {
  const int w = seg.width, h = seg.height;
  int perim = 0;
  for (int p : seg.regions[r].pixels) {
    int x = p % w, y = p / w;
    // An off-image neighbor counts as outside the region.
    bool boundary = x == 0 || seg.labels[p - 1] != r;
    boundary = boundary || x == w - 1 || seg.labels[p + 1] != r;
    boundary = boundary || y == 0 || seg.labels[p - w] != r;
    boundary = boundary || y == h - 1 || seg.labels[p + w] != r;
    if (boundary) ++perim;
  }
  return perim;
}

LowLevelDescriptor descriptor(const ImageFeatures& feat, const Segmentation& seg, int r,
                              const PixelSetStats& background_stats,
                              const PixelSetStats& image_stats) {
  require(r >= 0 && r < seg.region_count(), "bad_region", "region id out of range");
  require(seg.regions[r].area > 0, "empty_region", "descriptor of an empty region");

  PixelSetStats rs = pixel_set_stats(feat, seg.regions[r].pixels);
  LowLevelDescriptor d;
  int i = 0;
  auto abs_diff3 = [&](const std::array<double, 3>& a, const std::array<double, 3>& b) {
    for (int c = 0; c < 3; ++c) d.values[i++] = std::fabs(a[c] - b[c]);
  };
  abs_diff3(rs.mean_rgb, background_stats.mean_rgb);   // c1..c3
  abs_diff3(rs.mean_rgb, image_stats.mean_rgb);        // c4..c6
  d.values[i++] = chi_square(rs.h_rgb, background_stats.h_rgb);  // c7
  d.values[i++] = chi_square(rs.h_rgb, image_stats.h_rgb);       // c8
  abs_diff3(rs.mean_lab, background_stats.mean_lab);   // c9..c11
  abs_diff3(rs.mean_lab, image_stats.mean_lab);        // c12..c14
  d.values[i++] = chi_square(rs.h_lab, background_stats.h_lab);  // c15
  d.values[i++] = chi_square(rs.h_lab, image_stats.h_lab);       // c16
  abs_diff3(rs.mean_hsv, background_stats.mean_hsv);   // c17..c19
  abs_diff3(rs.mean_hsv, image_stats.mean_hsv);        // c20..c22
  d.values[i++] = chi_square(rs.h_hsv, background_stats.h_hsv);  // c23
  d.values[i++] = chi_square(rs.h_hsv, image_stats.h_hsv);       // c24
  d.values[i++] = chi_square(rs.h_lm, background_stats.h_lm);    // c25
  d.values[i++] = chi_square(rs.h_lm, image_stats.h_lm);         // c26
  d.values[i++] = chi_square(rs.h_lbp, background_stats.h_lbp);  // c27
  d.values[i++] = chi_square(rs.h_lbp, image_stats.h_lbp);       // c28
  for (int c = 0; c < 3; ++c) d.values[i++] = rs.var_rgb[c];     // s1..s3
  for (int c = 0; c < 3; ++c) d.values[i++] = rs.var_lab[c];     // s4..s6
  for (int c = 0; c < 3; ++c) d.values[i++] = rs.var_hsv[c];     // s7..s9
  d.values[i++] = region_perimeter(seg, r) /
                  (2.0 * (seg.width + seg.height));               // s10
  d.values[i++] = seg.regions[r].area /
                  (static_cast<double>(seg.width) * seg.height);  // s11
  return d;
}

}  // namespace sal
