#include "sal/backbone.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "binio.hpp"
#include "sal/rng.hpp"

namespace sal {

namespace {

struct Shape {
  int c = 0, h = 0, w = 0;  // w == 0 flags a flattened vector of length c
  bool flat() const { return w == 0; }
  std::size_t size() const {
    return flat() ? static_cast<std::size_t>(c)
                  : static_cast<std::size_t>(c) * h * w;
  }
};

std::size_t weight_count(const LayerSpec& layer, const Shape& in) {
  if (const auto* conv = std::get_if<ConvSpec>(&layer)) {
    std::size_t n = static_cast<std::size_t>(conv->out_channels) * in.c * conv->kernel *
                    conv->kernel;
    return n + (conv->bias ? conv->out_channels : 0);
  }
  if (const auto* fc = std::get_if<FcSpec>(&layer)) {
    std::size_t n = static_cast<std::size_t>(fc->out_dim) * in.size();
    return n + (fc->bias ? fc->out_dim : 0);
  }
  return 0;
}

Shape apply_shape(const LayerSpec& layer, const Shape& in) {
  if (const auto* conv = std::get_if<ConvSpec>(&layer)) {
    require(!in.flat(), "shape_mismatch", "conv layer needs a spatial input");
    require(conv->out_channels >= 1 && conv->kernel >= 1 && conv->stride >= 1 &&
                conv->pad >= 0,
            "bad_layer", "invalid conv parameters");
    int h = (in.h + 2 * conv->pad - conv->kernel) / conv->stride + 1;
    int w = (in.w + 2 * conv->pad - conv->kernel) / conv->stride + 1;
    require(h >= 1 && w >= 1, "shape_mismatch", "conv output collapses to zero size");
    return {conv->out_channels, h, w};
  }
  if (std::holds_alternative<ReluSpec>(layer)) return in;
  if (const auto* pool = std::get_if<MaxPoolSpec>(&layer)) {
    require(!in.flat(), "shape_mismatch", "maxpool layer needs a spatial input");
    require(pool->kernel >= 1 && pool->stride >= 1, "bad_layer", "invalid pool parameters");
    int h = (in.h - pool->kernel) / pool->stride + 1;
    int w = (in.w - pool->kernel) / pool->stride + 1;
    require(h >= 1 && w >= 1, "shape_mismatch", "pool output collapses to zero size");
    return Shape{in.c, h, w};
  }
  if (std::holds_alternative<FlattenSpec>(layer))
    return Shape{static_cast<int>(in.size()), 0, 0};
  const auto& fc = std::get<FcSpec>(layer);
  require(fc.out_dim >= 1, "bad_layer", "invalid fc width");
  return Shape{fc.out_dim, 0, 0};
}

}  // namespace

int validate_spec(const BackboneSpec& spec) {
  require(spec.input_side >= 1, "bad_spec", "input side must be >= 1");
  Shape shape{3, spec.input_side, spec.input_side};
  for (const auto& layer : spec.layers) shape = apply_shape(layer, shape);
  int out = static_cast<int>(shape.size());
  require(spec.feature_dim == 0 || spec.feature_dim == out, "shape_mismatch",
          "declared feature dim does not match the layer chain");
  return out;
}

Backbone make_desk_backbone(int input_side, std::uint64_t seed,
                            const std::array<double, 3>& mean_rgb) {
  Backbone net;
  net.seed = seed;
  net.spec.input_side = input_side;
  net.spec.mean_rgb = mean_rgb;
  net.spec.layers = {ConvSpec{8, 5, 1, 2, true},  ReluSpec{}, MaxPoolSpec{2, 2},
                     ConvSpec{16, 5, 1, 2, true}, ReluSpec{}, MaxPoolSpec{2, 2},
                     FlattenSpec{},               FcSpec{64, true}};
  net.spec.feature_dim = validate_spec(net.spec);

  // Glorot-uniform weights, zero biases. Fixed random projections are enough
  // for a desk-scale extractor; the seed is recorded so runs reproduce.
  Rng rng(seed);
  Shape shape{3, input_side, input_side};
  for (const auto& layer : net.spec.layers) {
    std::vector<double> w(weight_count(layer, shape), 0.0);
    if (const auto* conv = std::get_if<ConvSpec>(&layer)) {
      double fan_in = static_cast<double>(shape.c) * conv->kernel * conv->kernel;
      double fan_out = static_cast<double>(conv->out_channels) * conv->kernel * conv->kernel;
      double a = std::sqrt(6.0 / (fan_in + fan_out));
      std::size_t n = w.size() - (conv->bias ? conv->out_channels : 0);
      for (std::size_t i = 0; i < n; ++i) w[i] = rng.uniform(-a, a);
    } else if (const auto* fc = std::get_if<FcSpec>(&layer)) {
      double fan_in = static_cast<double>(shape.size());
      double a = std::sqrt(6.0 / (fan_in + fc->out_dim));
      std::size_t n = w.size() - (fc->bias ? fc->out_dim : 0);
      for (std::size_t i = 0; i < n; ++i) w[i] = rng.uniform(-a, a);
    }
    net.weights.push_back(std::move(w));
    shape = apply_shape(layer, shape);
  }
  return net;
}

std::vector<double> backbone_forward(const Backbone& net, const RasterImage& img) {
  require(img.width == net.spec.input_side && img.height == net.spec.input_side,
          "shape_mismatch", "backbone input must match the configured side");
  require(net.weights.size() == net.spec.layers.size(), "shape_mismatch",
          "weight blob count does not match the layer chain");

  const int side = net.spec.input_side;
  Shape shape{3, side, side};
  std::vector<double> buf(shape.size());
  for (int c = 0; c < 3; ++c) {
    double mean = net.spec.mean_rgb[c];
    double* plane = buf.data() + static_cast<std::size_t>(c) * side * side;
    for (int y = 0; y < side; ++y)
      for (int x = 0; x < side; ++x)
        plane[y * side + x] = (img.px(x, y)[c] - mean) / 255.0;
  }

  for (std::size_t li = 0; li < net.spec.layers.size(); ++li) {
    const auto& layer = net.spec.layers[li];
    const auto& w = net.weights[li];
    require(w.size() == weight_count(layer, shape), "shape_mismatch",
            "weight blob size mismatch at layer " + std::to_string(li));
    Shape out_shape = apply_shape(layer, shape);

    if (const auto* conv = std::get_if<ConvSpec>(&layer)) {
      std::vector<double> out(out_shape.size(), 0.0);
      const int ih = shape.h, iw = shape.w, oh = out_shape.h, ow = out_shape.w;
      const int kk = conv->kernel, stride = conv->stride, pad = conv->pad;
      const double* bias =
          conv->bias ? w.data() + w.size() - conv->out_channels : nullptr;
      for (int oc = 0; oc < conv->out_channels; ++oc) {
        double* oplane = out.data() + static_cast<std::size_t>(oc) * oh * ow;
        if (bias)
          for (std::size_t i = 0; i < static_cast<std::size_t>(oh) * ow; ++i)
            oplane[i] = bias[oc];
        for (int ic = 0; ic < shape.c; ++ic) {
          const double* iplane = buf.data() + static_cast<std::size_t>(ic) * ih * iw;
          const double* kbase =
              w.data() + (static_cast<std::size_t>(oc) * shape.c + ic) * kk * kk;
          for (int oy = 0; oy < oh; ++oy) {
            int iy0 = oy * stride - pad;
            for (int ky = 0; ky < kk; ++ky) {
              int iy = iy0 + ky;
              if (iy < 0 || iy >= ih) continue;
              const double* irow = iplane + static_cast<std::size_t>(iy) * iw;
              const double* krow = kbase + static_cast<std::size_t>(ky) * kk;
              double* orow = oplane + static_cast<std::size_t>(oy) * ow;
              for (int ox = 0; ox < ow; ++ox) {
                int ix0 = ox * stride - pad;
                int kx_lo = std::max(0, -ix0);
                int kx_hi = std::min(kk, iw - ix0);
                double acc = 0.0;
                for (int kx = kx_lo; kx < kx_hi; ++kx) acc += irow[ix0 + kx] * krow[kx];
                orow[ox] += acc;
              }
            }
          }
        }
      }
      buf = std::move(out);
    } else if (std::holds_alternative<ReluSpec>(layer)) {
      for (double& v : buf) v = std::max(0.0, v);
    } else if (const auto* pool = std::get_if<MaxPoolSpec>(&layer)) {
      std::vector<double> out(out_shape.size());
      const int ih = shape.h, iw = shape.w, oh = out_shape.h, ow = out_shape.w;
      for (int c = 0; c < shape.c; ++c) {
        const double* iplane = buf.data() + static_cast<std::size_t>(c) * ih * iw;
        double* oplane = out.data() + static_cast<std::size_t>(c) * oh * ow;
        for (int oy = 0; oy < oh; ++oy)
          for (int ox = 0; ox < ow; ++ox) {
            double best = -std::numeric_limits<double>::infinity();
            for (int ky = 0; ky < pool->kernel; ++ky)
              for (int kx = 0; kx < pool->kernel; ++kx) {
                int iy = oy * pool->stride + ky;
                int ix = ox * pool->stride + kx;
                best = std::max(best, iplane[static_cast<std::size_t>(iy) * iw + ix]);
              }
            oplane[static_cast<std::size_t>(oy) * ow + ox] = best;
          }
      }
      buf = std::move(out);
    } else if (std::holds_alternative<FlattenSpec>(layer)) {
      // data is already contiguous in c, y, x order
    } else {
      const auto& fc = std::get<FcSpec>(layer);
      std::vector<double> out(fc.out_dim, 0.0);
      std::size_t in_dim = shape.size();
      const double* bias = fc.bias ? w.data() + w.size() - fc.out_dim : nullptr;
      for (int o = 0; o < fc.out_dim; ++o) {
        const double* row = w.data() + static_cast<std::size_t>(o) * in_dim;
        double acc = bias ? bias[o] : 0.0;
        for (std::size_t i = 0; i < in_dim; ++i) acc += row[i] * buf[i];
        out[o] = acc;
      }
      buf = std::move(out);
    }
    shape = out_shape;
  }
  for (double v : buf)
    require(std::isfinite(v), "nonfinite_output", "backbone produced a non-finite value");
  return buf;
}

namespace {

nlohmann::json layers_to_json(const std::vector<LayerSpec>& layers) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& layer : layers) {
    nlohmann::json j;
    if (const auto* conv = std::get_if<ConvSpec>(&layer)) {
      j = {{"type", "conv"},     {"out", conv->out_channels}, {"kernel", conv->kernel},
           {"stride", conv->stride}, {"pad", conv->pad},          {"bias", conv->bias}};
    } else if (std::holds_alternative<ReluSpec>(layer)) {
      j = {{"type", "relu"}};
    } else if (const auto* pool = std::get_if<MaxPoolSpec>(&layer)) {
      j = {{"type", "maxpool"}, {"kernel", pool->kernel}, {"stride", pool->stride}};
    } else if (std::holds_alternative<FlattenSpec>(layer)) {
      j = {{"type", "flatten"}};
    } else {
      const auto& fc = std::get<FcSpec>(layer);
      j = {{"type", "fc"}, {"out", fc.out_dim}, {"bias", fc.bias}};
    }
    arr.push_back(j);
  }
  return arr;
}

std::vector<LayerSpec> layers_from_json(const nlohmann::json& arr) {
  std::vector<LayerSpec> layers;
  for (const auto& j : arr) {
    std::string type = j.at("type").get<std::string>();
    if (type == "conv")
      layers.push_back(ConvSpec{j.at("out").get<int>(), j.at("kernel").get<int>(),
                                j.at("stride").get<int>(), j.at("pad").get<int>(),
                                j.at("bias").get<bool>()});
    else if (type == "relu")
      layers.push_back(ReluSpec{});
    else if (type == "maxpool")
      layers.push_back(MaxPoolSpec{j.at("kernel").get<int>(), j.at("stride").get<int>()});
    else if (type == "flatten")
      layers.push_back(FlattenSpec{});
    else if (type == "fc")
      layers.push_back(FcSpec{j.at("out").get<int>(), j.at("bias").get<bool>()});
    else
      throw Error("bad_layer", "unknown layer type '" + type + "'");
  }
  return layers;
}

}  // namespace

void save_backbone(const Backbone& net, const std::string& path) {
  auto out = binio::open_out(path);
  nlohmann::json header;
  header["format"] = "backbone-v1";
  header["input_side"] = net.spec.input_side;
  header["feature_dim"] = net.spec.feature_dim;
  header["mean_rgb"] = net.spec.mean_rgb;
  header["seed"] = net.seed;
  header["layers"] = layers_to_json(net.spec.layers);
  binio::write_header(out, header);
  for (const auto& w : net.weights) binio::write_vec(out, w);
  require(out.good(), "unwritable_file", "failed writing " + path);
}

Backbone load_backbone(const std::string& path) {
  auto in = binio::open_in(path);
  nlohmann::json header = binio::read_header(in, "backbone-v1");
  Backbone net;
  net.spec.input_side = header.at("input_side").get<int>();
  net.spec.feature_dim = header.at("feature_dim").get<int>();
  auto mean = header.at("mean_rgb").get<std::vector<double>>();
  require(mean.size() == 3, "bad_header", "mean_rgb must have three entries");
  std::copy(mean.begin(), mean.end(), net.spec.mean_rgb.begin());
  net.seed = header.at("seed").get<std::uint64_t>();
  net.spec.layers = layers_from_json(header.at("layers"));
  validate_spec(net.spec);

  Shape shape{3, net.spec.input_side, net.spec.input_side};
  for (const auto& layer : net.spec.layers) {
    net.weights.push_back(binio::read_vec<double>(in, weight_count(layer, shape)));
    shape = apply_shape(layer, shape);
  }
  return net;
}

}  // namespace sal
