#include "sal/crf.hpp"

#include <algorithm>
#include <cmath>

#include "sal/parallel.hpp"

namespace sal {

namespace {

constexpr double kUnaryEps = 1e-6;
constexpr double kDropThreshold = 1e-26;

int kernel_radius(double sigma, int max_extent) {
  // exp(-r^2 / (2 sigma^2)) < kDropThreshold beyond this radius.
  double r = sigma * std::sqrt(-2.0 * std::log(kDropThreshold));
  return std::min(max_extent, static_cast<int>(std::ceil(r)));
}

// Separable Gaussian-weighted sum (unnormalized blur) with zero padding:
// out[i] = sum_j in[j] * exp(-|p_i-p_j|^2 / (2 sigma^2)), including j = i.
void gaussian_weighted_sum(const std::vector<double>& in, int w, int h, double sigma,
                           int radius, std::vector<double>& tmp, std::vector<double>& out) {
  std::vector<double> kern(radius + 1);
  for (int i = 0; i <= radius; ++i) kern[i] = std::exp(-0.5 * i * i / (sigma * sigma));
  tmp.assign(in.size(), 0.0);
  out.assign(in.size(), 0.0);
  for (int y = 0; y < h; ++y) {
    const double* row = in.data() + static_cast<std::size_t>(y) * w;
    double* trow = tmp.data() + static_cast<std::size_t>(y) * w;
    for (int x = 0; x < w; ++x) {
      double acc = row[x];
      for (int d = 1; d <= radius; ++d) {
        if (x - d >= 0) acc += kern[d] * row[x - d];
        if (x + d < w) acc += kern[d] * row[x + d];
      }
      trow[x] = acc;
    }
  }
  for (int y = 0; y < h; ++y) {
    double* orow = out.data() + static_cast<std::size_t>(y) * w;
    for (int x = 0; x < w; ++x) {
      double acc = tmp[static_cast<std::size_t>(y) * w + x];
      for (int d = 1; d <= radius; ++d) {
        if (y - d >= 0) acc += kern[d] * tmp[static_cast<std::size_t>(y - d) * w + x];
        if (y + d < h) acc += kern[d] * tmp[static_cast<std::size_t>(y + d) * w + x];
      }
      orow[x] = acc;
    }
  }
}

}  // namespace

SaliencyMap crf_refine(const RasterImage& img, const SaliencyMap& init,
                       const CrfParams& params, int jobs, CrfDiagnostics* diagnostics) {
  require(img.width == init.width && img.height == init.height, "size_mismatch",
          "image and initial map must share dimensions");
  require(params.w1 >= 0.0 && params.w2 >= 0.0 && params.sigma_alpha > 0.0 &&
              params.sigma_beta > 0.0 && params.sigma_gamma > 0.0 &&
              params.iterations >= 0,
          "bad_param", "invalid CRF parameters");

  const int w = img.width, h = img.height;
  const std::size_t n = init.size();

  SaliencyMap clamped(w, h);
  for (std::size_t p = 0; p < n; ++p)
    clamped.values[p] = std::clamp(init.values[p], kUnaryEps, 1.0 - kUnaryEps);

  // Zero pairwise terms leave the initialization as the exact fixed point.
  if ((params.w1 == 0.0 && params.w2 == 0.0) || params.iterations == 0) {
    if (diagnostics) diagnostics->max_delta.assign(params.iterations, 0.0);
    return clamped;
  }

  std::vector<double> p1(clamped.values), p0(n);
  for (std::size_t p = 0; p < n; ++p) p0[p] = 1.0 - p1[p];
  std::vector<double> q1(p1), q0(p0), nq1(n), nq0(n);

  // The bilateral kernel factorizes into a spatial and a color table; the
  // squared 8-bit color distance is an exact integer index.
  const int ra = kernel_radius(params.sigma_alpha, std::max(w, h) - 1);
  const int rg = kernel_radius(params.sigma_gamma, std::max(w, h) - 1);
  std::vector<double> spatial(static_cast<std::size_t>(2 * ra + 1) * (2 * ra + 1));
  for (int dy = -ra; dy <= ra; ++dy)
    for (int dx = -ra; dx <= ra; ++dx)
      spatial[static_cast<std::size_t>(dy + ra) * (2 * ra + 1) + (dx + ra)] =
          std::exp(-0.5 * (dx * dx + dy * dy) /
                   (params.sigma_alpha * params.sigma_alpha));
  std::vector<double> color_table(3 * 255 * 255 + 1);
  for (std::size_t d2 = 0; d2 < color_table.size(); ++d2)
    color_table[d2] =
        std::exp(-0.5 * static_cast<double>(d2) / (params.sigma_beta * params.sigma_beta));

  std::vector<double> blur0, blur1, blur_tmp0, blur_tmp1;
  if (diagnostics) diagnostics->max_delta.clear();
  std::vector<double> row_delta(h, 0.0);

  for (int iter = 0; iter < params.iterations; ++iter) {
    if (params.w2 > 0.0) {
      gaussian_weighted_sum(q0, w, h, params.sigma_gamma, rg, blur_tmp0, blur0);
      gaussian_weighted_sum(q1, w, h, params.sigma_gamma, rg, blur_tmp1, blur1);
    }
    parallel_for(static_cast<std::size_t>(h), jobs, [&](std::size_t yi) {
      int y = static_cast<int>(yi);
      double delta = 0.0;
      for (int x = 0; x < w; ++x) {
        std::size_t i = static_cast<std::size_t>(y) * w + x;
        double sum0 = 0.0, sum1 = 0.0;  // bilateral sums of Q(0)/Q(1), self included
        if (params.w1 > 0.0) {
          const auto* ci = img.px(x, y);
          int y_lo = std::max(0, y - ra), y_hi = std::min(h - 1, y + ra);
          int x_lo = std::max(0, x - ra), x_hi = std::min(w - 1, x + ra);
          for (int yy = y_lo; yy <= y_hi; ++yy) {
            const double* srow =
                spatial.data() + static_cast<std::size_t>(yy - y + ra) * (2 * ra + 1) +
                (x_lo - x + ra);
            const std::uint8_t* crow = img.data.data() + img.offset(x_lo, yy);
            const double* q0row = q0.data() + static_cast<std::size_t>(yy) * w + x_lo;
            const double* q1row = q1.data() + static_cast<std::size_t>(yy) * w + x_lo;
            for (int xx = 0; xx <= x_hi - x_lo; ++xx) {
              int dr = crow[3 * xx] - ci[0];
              int dg = crow[3 * xx + 1] - ci[1];
              int db = crow[3 * xx + 2] - ci[2];
              double k = srow[xx] * color_table[dr * dr + dg * dg + db * db];
              sum0 += k * q0row[xx];
              sum1 += k * q1row[xx];
            }
          }
          // remove the self term (spatial and color factors are both 1)
          sum0 -= q0[i];
          sum1 -= q1[i];
        }
        double m1 = params.w1 * sum0;  // message toward label 1 couples Q(0)
        double m0 = params.w1 * sum1;
        if (params.w2 > 0.0) {
          m1 += params.w2 * (blur0[i] - q0[i]);
          m0 += params.w2 * (blur1[i] - q1[i]);
        }
        double a = p1[i] * std::exp(-m1);
        double b = p0[i] * std::exp(-m0);
        double z = a + b;
        double v1 = a / z, v0 = b / z;
        delta = std::max(delta, std::fabs(v1 - q1[i]));
        nq1[i] = v1;
        nq0[i] = v0;
      }
      row_delta[y] = delta;
    });
    std::swap(q1, nq1);
    std::swap(q0, nq0);
    if (diagnostics)
      diagnostics->max_delta.push_back(*std::max_element(row_delta.begin(), row_delta.end()));
  }

  SaliencyMap out(w, h);
  out.values = std::move(q1);
  return out;
}

}  // namespace sal
