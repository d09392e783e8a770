#include "trendcnn/nn/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace trendcnn::nn::kernels {

namespace {

// Output index range [lo, hi) whose input coordinate o*stride + k - pad lies in [0, in).
struct Range {
  long lo, hi;
};

Range valid_outputs(long k, long pad, long stride, long in, long out) {
  long lo = 0;
  if (pad > k) lo = (pad - k + stride - 1) / stride;
  long hi = 0;
  if (in - 1 + pad - k >= 0) hi = std::min(out, (in - 1 + pad - k) / stride + 1);
  return {lo, std::max(lo, hi)};
}

struct Ranges {
  std::vector<Range> rows;  // per filter row
  std::vector<Range> cols;  // per filter column
};

Ranges valid_ranges(const WindowGeometry& g) {
  Ranges r;
  r.rows.reserve(g.filter_h);
  r.cols.reserve(g.filter_w);
  for (std::size_t ky = 0; ky < g.filter_h; ++ky) {
    r.rows.push_back(valid_outputs(static_cast<long>(ky), static_cast<long>(g.pad_top),
                                   static_cast<long>(g.stride_h), static_cast<long>(g.in.height),
                                   static_cast<long>(g.out.height)));
  }
  for (std::size_t kx = 0; kx < g.filter_w; ++kx) {
    r.cols.push_back(valid_outputs(static_cast<long>(kx), static_cast<long>(g.pad_left),
                                   static_cast<long>(g.stride_w), static_cast<long>(g.in.width),
                                   static_cast<long>(g.out.width)));
  }
  return r;
}

}  // namespace

void conv2d_forward(const WindowGeometry& g, const double* in, const double* weights, const double* bias,
                    double* out) {
  const long oh = static_cast<long>(g.out.height), ow = static_cast<long>(g.out.width);
  const long ih = static_cast<long>(g.in.height), iw = static_cast<long>(g.in.width);
  const long sh = static_cast<long>(g.stride_h), sw = static_cast<long>(g.stride_w);
  const long pt = static_cast<long>(g.pad_top), pl = static_cast<long>(g.pad_left);
  const std::size_t fh = g.filter_h, fw = g.filter_w, channels = g.in.channels;
  const Ranges ranges = valid_ranges(g);

  for (std::size_t n = 0; n < g.out.channels; ++n) {
    double* o = out + n * oh * ow;
    std::fill(o, o + oh * ow, 0.0);
    for (std::size_t c = 0; c < channels; ++c) {
      const double* plane = in + c * ih * iw;
      const double* wk = weights + (n * channels + c) * fh * fw;
      for (std::size_t ky = 0; ky < fh; ++ky) {
        const Range rows = ranges.rows[ky];
        for (std::size_t kx = 0; kx < fw; ++kx) {
          const Range cols = ranges.cols[kx];
          const double w = wk[ky * fw + kx];
          for (long oy = rows.lo; oy < rows.hi; ++oy) {
            const long base = (oy * sh + static_cast<long>(ky) - pt) * iw + static_cast<long>(kx) - pl;
            double* dst = o + oy * ow;
            if (sw == 1) {
              const double* src = plane + base + cols.lo;
              for (long ox = cols.lo; ox < cols.hi; ++ox) dst[ox] += w * src[ox - cols.lo];
            } else {
              for (long ox = cols.lo; ox < cols.hi; ++ox) dst[ox] += w * plane[base + ox * sw];
            }
          }
        }
      }
    }
    const double b = bias[n];
    for (long i = 0; i < oh * ow; ++i) o[i] += b;
  }
}

void conv2d_backward(const WindowGeometry& g, const double* in, const double* weights, const double* grad_out,
                     double* grad_in, double* grad_w, double* grad_b) {
  const long oh = static_cast<long>(g.out.height), ow = static_cast<long>(g.out.width);
  const long ih = static_cast<long>(g.in.height), iw = static_cast<long>(g.in.width);
  const long sh = static_cast<long>(g.stride_h), sw = static_cast<long>(g.stride_w);
  const long pt = static_cast<long>(g.pad_top), pl = static_cast<long>(g.pad_left);
  const std::size_t fh = g.filter_h, fw = g.filter_w, channels = g.in.channels;
  const Ranges ranges = valid_ranges(g);

  for (std::size_t n = 0; n < g.out.channels; ++n) {
    const double* go = grad_out + n * oh * ow;
    double bsum = 0.0;
    for (long i = 0; i < oh * ow; ++i) bsum += go[i];
    grad_b[n] += bsum;
    for (std::size_t c = 0; c < channels; ++c) {
      const double* plane = in + c * ih * iw;
      double* gplane = grad_in ? grad_in + c * ih * iw : nullptr;
      const std::size_t wbase = (n * channels + c) * fh * fw;
      for (std::size_t ky = 0; ky < fh; ++ky) {
        const Range rows = ranges.rows[ky];
        for (std::size_t kx = 0; kx < fw; ++kx) {
          const Range cols = ranges.cols[kx];
          const double w = weights[wbase + ky * fw + kx];
          double acc = 0.0;
          for (long oy = rows.lo; oy < rows.hi; ++oy) {
            const long offset = (oy * sh + static_cast<long>(ky) - pt) * iw + static_cast<long>(kx) - pl;
            const double* grow = go + oy * ow;
            for (long ox = cols.lo; ox < cols.hi; ++ox) acc += grow[ox] * plane[offset + ox * sw];
            if (gplane) {
              for (long ox = cols.lo; ox < cols.hi; ++ox) gplane[offset + ox * sw] += w * grow[ox];
            }
          }
          grad_w[wbase + ky * fw + kx] += acc;
        }
      }
    }
  }
}

void max_pool_forward(const WindowGeometry& g, const double* in, double* out, std::uint32_t* argmax) {
  const std::size_t ih = g.in.height, iw = g.in.width, oh = g.out.height, ow = g.out.width;
  for (std::size_t c = 0; c < g.in.channels; ++c) {
    for (std::size_t oy = 0; oy < oh; ++oy) {
      for (std::size_t ox = 0; ox < ow; ++ox) {
        std::size_t best = (c * ih + oy * g.stride_h) * iw + ox * g.stride_w;
        for (std::size_t ky = 0; ky < g.filter_h; ++ky) {
          for (std::size_t kx = 0; kx < g.filter_w; ++kx) {
            const std::size_t idx = (c * ih + oy * g.stride_h + ky) * iw + ox * g.stride_w + kx;
            if (in[idx] > in[best]) best = idx;
          }
        }
        const std::size_t o = (c * oh + oy) * ow + ox;
        out[o] = in[best];
        argmax[o] = static_cast<std::uint32_t>(best);
      }
    }
  }
}

void max_pool_backward(const WindowGeometry& g, const std::uint32_t* argmax, const double* grad_out,
                       double* grad_in) {
  const std::size_t n = g.out.size();
  for (std::size_t o = 0; o < n; ++o) grad_in[argmax[o]] += grad_out[o];
}

void avg_pool_forward(const WindowGeometry& g, const double* in, double* out) {
  const std::size_t ih = g.in.height, iw = g.in.width, oh = g.out.height, ow = g.out.width;
  const double inv = 1.0 / static_cast<double>(g.filter_h * g.filter_w);
  for (std::size_t c = 0; c < g.in.channels; ++c) {
    for (std::size_t oy = 0; oy < oh; ++oy) {
      for (std::size_t ox = 0; ox < ow; ++ox) {
        double acc = 0.0;
        for (std::size_t ky = 0; ky < g.filter_h; ++ky) {
          for (std::size_t kx = 0; kx < g.filter_w; ++kx) {
            acc += in[(c * ih + oy * g.stride_h + ky) * iw + ox * g.stride_w + kx];
          }
        }
        out[(c * oh + oy) * ow + ox] = acc * inv;
      }
    }
  }
}

void avg_pool_backward(const WindowGeometry& g, const double* grad_out, double* grad_in) {
  const std::size_t ih = g.in.height, iw = g.in.width, oh = g.out.height, ow = g.out.width;
  const double inv = 1.0 / static_cast<double>(g.filter_h * g.filter_w);
  for (std::size_t c = 0; c < g.in.channels; ++c) {
    for (std::size_t oy = 0; oy < oh; ++oy) {
      for (std::size_t ox = 0; ox < ow; ++ox) {
        const double share = grad_out[(c * oh + oy) * ow + ox] * inv;
        for (std::size_t ky = 0; ky < g.filter_h; ++ky) {
          for (std::size_t kx = 0; kx < g.filter_w; ++kx) {
            grad_in[(c * ih + oy * g.stride_h + ky) * iw + ox * g.stride_w + kx] += share;
          }
        }
      }
    }
  }
}

void dense_forward(std::size_t in_dim, std::size_t out_dim, const double* in, const double* weights,
                   const double* bias, double* out) {
  for (std::size_t o = 0; o < out_dim; ++o) {
    const double* w = weights + o * in_dim;
    double acc = 0.0;
    for (std::size_t i = 0; i < in_dim; ++i) acc += w[i] * in[i];
    out[o] = acc + bias[o];
  }
}

void dense_backward(std::size_t in_dim, std::size_t out_dim, const double* in, const double* weights,
                    const double* grad_out, double* grad_in, double* grad_w, double* grad_b) {
  for (std::size_t o = 0; o < out_dim; ++o) {
    const double g = grad_out[o];
    grad_b[o] += g;
    double* gw = grad_w + o * in_dim;
    for (std::size_t i = 0; i < in_dim; ++i) gw[i] += g * in[i];
    if (grad_in) {
      const double* w = weights + o * in_dim;
      for (std::size_t i = 0; i < in_dim; ++i) grad_in[i] += w[i] * g;
    }
  }
}

void relu_forward(std::size_t n, const double* in, double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = in[i] > 0.0 ? in[i] : 0.0;
}

void relu_backward(std::size_t n, const double* in, const double* grad_out, double* grad_in) {
  for (std::size_t i = 0; i < n; ++i) grad_in[i] = in[i] > 0.0 ? grad_out[i] : 0.0;
}

void sigmoid_forward(std::size_t n, const double* in, double* out) {
  for (std::size_t i = 0; i < n; ++i) {
    const double x = in[i];
    if (x >= 0) {
      out[i] = 1.0 / (1.0 + std::exp(-x));
    } else {
      const double e = std::exp(x);
      out[i] = e / (1.0 + e);
    }
  }
}

void sigmoid_backward(std::size_t n, const double* out, const double* grad_out, double* grad_in) {
  for (std::size_t i = 0; i < n; ++i) grad_in[i] = grad_out[i] * out[i] * (1.0 - out[i]);
}

void softmax_forward(std::size_t n, const double* in, double* out) {
  const double mx = *std::max_element(in, in + n);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = std::exp(in[i] - mx);
    sum += out[i];
  }
  for (std::size_t i = 0; i < n; ++i) out[i] /= sum;
}

void softmax_backward(std::size_t n, const double* out, const double* grad_out, double* grad_in) {
  double dot = 0.0;
  for (std::size_t i = 0; i < n; ++i) dot += grad_out[i] * out[i];
  for (std::size_t i = 0; i < n; ++i) grad_in[i] = out[i] * (grad_out[i] - dot);
}

void conv2d_forward_batch(const WindowGeometry& g, std::size_t batch, const double* in, const double* weights,
                          const double* bias, double* out) {
  const std::size_t in_size = g.in.size();
  const std::size_t out_size = g.out.size();
#pragma omp parallel for schedule(static)
  for (long b = 0; b < static_cast<long>(batch); ++b) {
    conv2d_forward(g, in + b * in_size, weights, bias, out + b * out_size);
  }
}

}  // namespace trendcnn::nn::kernels
