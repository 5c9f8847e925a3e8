#include "sal/png_io.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <memory>

namespace sal {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using File = std::unique_ptr<std::FILE, FileCloser>;

// Decoded 8- or 16-bit single- or tri-channel buffer.
struct Decoded {
  int width = 0;
  int height = 0;
  int channels = 0;
  int bit_depth = 0;
  std::vector<std::uint16_t> samples;  // channel-interleaved
};

Decoded read_png(const std::string& path, bool want16) {
  File fp(std::fopen(path.c_str(), "rb"));
  require(fp != nullptr, "unreadable_file", "cannot open " + path);

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  require(png != nullptr, "png_error", "png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw Error("png_error", "png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error("unsupported_format", "failed to decode " + path);
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);

  png_uint_32 w = png_get_image_width(png, info);
  png_uint_32 h = png_get_image_height(png, info);
  int depth = png_get_bit_depth(png, info);
  int color = png_get_color_type(png, info);

  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_set_strip_alpha(png);
  if (depth == 16 && !want16) png_set_strip_16(png);
  png_read_update_info(png, info);

  depth = png_get_bit_depth(png, info);
  int ch = png_get_channels(png, info);
  std::size_t rowbytes = png_get_rowbytes(png, info);

  std::vector<std::uint8_t> raw(rowbytes * h);
  std::vector<png_bytep> rows(h);
  for (png_uint_32 y = 0; y < h; ++y) rows[y] = raw.data() + y * rowbytes;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  Decoded out;
  out.width = static_cast<int>(w);
  out.height = static_cast<int>(h);
  out.channels = ch;
  out.bit_depth = depth;
  out.samples.resize(static_cast<std::size_t>(w) * h * ch);
  if (depth == 8) {
    for (std::size_t i = 0; i < out.samples.size(); ++i) out.samples[i] = raw[i];
  } else if (depth == 16) {
    for (std::size_t i = 0; i < out.samples.size(); ++i)
      out.samples[i] = static_cast<std::uint16_t>((raw[2 * i] << 8) | raw[2 * i + 1]);
  } else {
    throw Error("unsupported_format", "unsupported bit depth in " + path);
  }
  return out;
}

void write_png(const std::string& path, int width, int height, int channels,
               int bit_depth, const std::vector<std::uint16_t>& samples) {
  File fp(std::fopen(path.c_str(), "wb"));
  require(fp != nullptr, "unwritable_file", "cannot open " + path + " for writing");

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  require(png != nullptr, "png_error", "png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw Error("png_error", "png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error("png_error", "failed to encode " + path);
  }
  png_init_io(png, fp.get());
  int color = channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY;
  png_set_IHDR(png, info, width, height, bit_depth, color, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  std::size_t rowsamples = static_cast<std::size_t>(width) * channels;
  std::vector<std::uint8_t> row(rowsamples * (bit_depth / 8));
  for (int y = 0; y < height; ++y) {
    const std::uint16_t* src = samples.data() + static_cast<std::size_t>(y) * rowsamples;
    if (bit_depth == 8) {
      for (std::size_t i = 0; i < rowsamples; ++i) row[i] = static_cast<std::uint8_t>(src[i]);
    } else {
      for (std::size_t i = 0; i < rowsamples; ++i) {
        row[2 * i] = static_cast<std::uint8_t>(src[i] >> 8);
        row[2 * i + 1] = static_cast<std::uint8_t>(src[i] & 0xff);
      }
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace

RasterImage load_image(const std::string& path) {
  Decoded d = read_png(path, false);
  require(d.channels == 1 || d.channels == 3, "unsupported_format",
          "expected grayscale or RGB: " + path);
  RasterImage img(d.width, d.height);
  for (int y = 0; y < d.height; ++y)
    for (int x = 0; x < d.width; ++x) {
      std::size_t i = (static_cast<std::size_t>(y) * d.width + x) * d.channels;
      std::uint8_t r = static_cast<std::uint8_t>(d.samples[i]);
      std::uint8_t g = d.channels == 3 ? static_cast<std::uint8_t>(d.samples[i + 1]) : r;
      std::uint8_t b = d.channels == 3 ? static_cast<std::uint8_t>(d.samples[i + 2]) : r;
      img.set(x, y, r, g, b);
    }
  return img;
}

void save_image(const RasterImage& img, const std::string& path) {
  require(!img.empty(), "empty_image", "cannot save an empty image");
  std::vector<std::uint16_t> samples(img.data.begin(), img.data.end());
  write_png(path, img.width, img.height, 3, 8, samples);
}

void save_map(const SaliencyMap& map, const std::string& path) {
  std::vector<std::uint16_t> samples(map.size());
  for (std::size_t i = 0; i < map.size(); ++i) {
    double v = map.values[i];
    require(v >= 0.0 && v <= 1.0, "bad_map", "saliency value outside [0,1]");
    samples[i] = static_cast<std::uint16_t>(std::lround(v * 255.0));
  }
  write_png(path, map.width, map.height, 1, 8, samples);
}

SaliencyMap load_map(const std::string& path) {
  Decoded d = read_png(path, false);
  require(d.channels == 1, "unsupported_format", "saliency map must be grayscale: " + path);
  SaliencyMap map(d.width, d.height);
  for (std::size_t i = 0; i < map.size(); ++i) map.values[i] = d.samples[i] / 255.0;
  return map;
}

void save_mask(const BinaryMask& mask, const std::string& path) {
  std::vector<std::uint16_t> samples(mask.values.size());
  for (std::size_t i = 0; i < samples.size(); ++i) samples[i] = mask.values[i] ? 255 : 0;
  write_png(path, mask.width, mask.height, 1, 8, samples);
}

BinaryMask load_mask(const std::string& path) {
  Decoded d = read_png(path, false);
  require(d.channels == 1, "unsupported_format", "mask must be grayscale: " + path);
  BinaryMask mask(d.width, d.height);
  for (std::size_t i = 0; i < mask.values.size(); ++i)
    mask.values[i] = d.samples[i] >= 128 ? 1 : 0;
  return mask;
}

void save_labels16(const std::vector<int>& labels, int width, int height,
                   const std::string& path) {
  require(labels.size() == static_cast<std::size_t>(width) * height, "bad_labels",
          "label grid size mismatch");
  std::vector<std::uint16_t> samples(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    require(labels[i] >= 0 && labels[i] <= 0xffff, "bad_labels", "label out of 16-bit range");
    samples[i] = static_cast<std::uint16_t>(labels[i]);
  }
  write_png(path, width, height, 1, 16, samples);
}

std::vector<int> load_labels16(const std::string& path, int& width, int& height) {
  Decoded d = read_png(path, true);
  require(d.channels == 1, "unsupported_format", "label grid must be grayscale: " + path);
  width = d.width;
  height = d.height;
  return std::vector<int>(d.samples.begin(), d.samples.end());
}

}  // namespace sal
