#include "trendcnn/nn/layer.hpp"

#include <sstream>

#include "trendcnn/error.hpp"

namespace trendcnn::nn {

std::string to_string(const Shape3& s) {
  return std::to_string(s.channels) + "x" + std::to_string(s.height) + "x" + std::to_string(s.width);
}

LayerSpec LayerSpec::conv2d(std::size_t fh, std::size_t fw, std::size_t n, std::size_t sh, std::size_t sw,
                            Padding padding) {
  LayerSpec s{LayerKind::Conv2d};
  s.filter_h = fh;
  s.filter_w = fw;
  s.filters = n;
  s.stride_h = sh;
  s.stride_w = sw;
  s.padding = padding;
  return s;
}

LayerSpec LayerSpec::max_pool(std::size_t fh, std::size_t fw, std::size_t sh, std::size_t sw) {
  LayerSpec s{LayerKind::MaxPool};
  s.filter_h = fh;
  s.filter_w = fw;
  s.stride_h = sh;
  s.stride_w = sw;
  return s;
}

LayerSpec LayerSpec::avg_pool(std::size_t fh, std::size_t fw, std::size_t sh, std::size_t sw) {
  LayerSpec s = max_pool(fh, fw, sh, sw);
  s.kind = LayerKind::AvgPool;
  return s;
}

LayerSpec LayerSpec::dense(std::size_t units) {
  LayerSpec s{LayerKind::Dense};
  s.units = units;
  return s;
}

std::string to_string(const LayerSpec& s) {
  auto pad = [&] { return s.padding == Padding::Same ? "same" : "valid"; };
  std::ostringstream out;
  switch (s.kind) {
    case LayerKind::Conv2d:
      out << "conv2d " << s.filter_h << ' ' << s.filter_w << ' ' << s.filters << ' ' << s.stride_h << ' '
          << s.stride_w << ' ' << pad();
      break;
    case LayerKind::MaxPool:
    case LayerKind::AvgPool:
      out << (s.kind == LayerKind::MaxPool ? "maxpool " : "avgpool ") << s.filter_h << ' ' << s.filter_w << ' '
          << s.stride_h << ' ' << s.stride_w;
      break;
    case LayerKind::Dense: out << "dense " << s.units; break;
    case LayerKind::Relu: out << "relu"; break;
    case LayerKind::Sigmoid: out << "sigmoid"; break;
    case LayerKind::Softmax: out << "softmax"; break;
  }
  return out.str();
}

LayerSpec parse_layer_spec(const std::string& text) {
  std::istringstream in(text);
  std::string kind;
  in >> kind;
  LayerSpec s;
  if (kind == "conv2d") {
    std::string pad;
    s.kind = LayerKind::Conv2d;
    in >> s.filter_h >> s.filter_w >> s.filters >> s.stride_h >> s.stride_w >> pad;
    if (pad != "same" && pad != "valid") throw ParseError("bad padding in layer spec '" + text + "'");
    s.padding = pad == "same" ? Padding::Same : Padding::Valid;
  } else if (kind == "maxpool" || kind == "avgpool") {
    s.kind = kind == "maxpool" ? LayerKind::MaxPool : LayerKind::AvgPool;
    in >> s.filter_h >> s.filter_w >> s.stride_h >> s.stride_w;
  } else if (kind == "dense") {
    s.kind = LayerKind::Dense;
    in >> s.units;
  } else if (kind == "relu") {
    s.kind = LayerKind::Relu;
  } else if (kind == "sigmoid") {
    s.kind = LayerKind::Sigmoid;
  } else if (kind == "softmax") {
    s.kind = LayerKind::Softmax;
  } else {
    throw ParseError("unknown layer kind '" + kind + "'");
  }
  if (in.fail()) throw ParseError("malformed layer spec '" + text + "'");
  return s;
}

std::size_t same_padding_total(std::size_t in, std::size_t filter, std::size_t stride) {
  const std::size_t out = (in + stride - 1) / stride;
  const std::size_t needed = (out - 1) * stride + filter;
  return needed > in ? needed - in : 0;
}

std::size_t window_output_dim(std::size_t in, std::size_t filter, std::size_t stride, Padding padding) {
  if (filter == 0 || stride == 0) throw ShapeError("filter and stride must be positive");
  const std::size_t total = padding == Padding::Same ? same_padding_total(in, filter, stride) : 0;
  if (in + total < filter) {
    throw ShapeError("filter " + std::to_string(filter) + " larger than input " + std::to_string(in));
  }
  return (in + total - filter) / stride + 1;
}

WindowGeometry window_geometry(const Shape3& in, const LayerSpec& spec) {
  if (spec.kind != LayerKind::Conv2d && spec.kind != LayerKind::MaxPool && spec.kind != LayerKind::AvgPool) {
    throw ShapeError("window geometry requested for a non-window layer");
  }
  if (spec.kind == LayerKind::Conv2d && spec.filters == 0) throw ShapeError("conv2d needs at least one filter");
  const Padding pad = spec.kind == LayerKind::Conv2d ? spec.padding : Padding::Valid;
  WindowGeometry g{};
  g.in = in;
  g.filter_h = spec.filter_h;
  g.filter_w = spec.filter_w;
  g.stride_h = spec.stride_h;
  g.stride_w = spec.stride_w;
  g.out.channels = spec.kind == LayerKind::Conv2d ? spec.filters : in.channels;
  g.out.height = window_output_dim(in.height, spec.filter_h, spec.stride_h, pad);
  g.out.width = window_output_dim(in.width, spec.filter_w, spec.stride_w, pad);
  if (pad == Padding::Same) {
    g.pad_top = same_padding_total(in.height, spec.filter_h, spec.stride_h) / 2;
    g.pad_left = same_padding_total(in.width, spec.filter_w, spec.stride_w) / 2;
  }
  return g;
}

Shape3 layer_output_shape(const Shape3& in, const LayerSpec& spec) {
  switch (spec.kind) {
    case LayerKind::Conv2d:
    case LayerKind::MaxPool:
    case LayerKind::AvgPool: return window_geometry(in, spec).out;
    case LayerKind::Dense:
      if (spec.units == 0) throw ShapeError("dense layer needs at least one unit");
      return {spec.units, 1, 1};
    default: return in;
  }
}

std::size_t layer_kernel_size(const Shape3& in, const LayerSpec& spec) {
  switch (spec.kind) {
    case LayerKind::Conv2d: return spec.filters * in.channels * spec.filter_h * spec.filter_w;
    case LayerKind::Dense: return spec.units * in.size();
    default: return 0;
  }
}

std::size_t layer_bias_size(const Shape3&, const LayerSpec& spec) {
  switch (spec.kind) {
    case LayerKind::Conv2d: return spec.filters;
    case LayerKind::Dense: return spec.units;
    default: return 0;
  }
}

}  // namespace trendcnn::nn
