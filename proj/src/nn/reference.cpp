#include "trendcnn/nn/reference.hpp"

#include <cstring>

namespace trendcnn::nn::reference {

namespace {

bool inside(long v, std::size_t limit) { return v >= 0 && v < static_cast<long>(limit); }

}  // namespace

void conv2d_forward(const WindowGeometry& g, std::size_t batch, const double* in, const double* weights,
                    const double* bias, double* out) {
  const auto& is = g.in;
  const auto& os = g.out;
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t n = 0; n < os.channels; ++n) {
      for (std::size_t oy = 0; oy < os.height; ++oy) {
        for (std::size_t ox = 0; ox < os.width; ++ox) {
          double acc = 0.0;
          for (std::size_t c = 0; c < is.channels; ++c) {
            for (std::size_t ky = 0; ky < g.filter_h; ++ky) {
              for (std::size_t kx = 0; kx < g.filter_w; ++kx) {
                const long iy = static_cast<long>(oy * g.stride_h + ky) - static_cast<long>(g.pad_top);
                const long ix = static_cast<long>(ox * g.stride_w + kx) - static_cast<long>(g.pad_left);
                if (!inside(iy, is.height) || !inside(ix, is.width)) continue;
                const double x = in[((b * is.channels + c) * is.height + iy) * is.width + ix];
                const double w = weights[((n * is.channels + c) * g.filter_h + ky) * g.filter_w + kx];
                acc += w * x;
              }
            }
          }
          out[((b * os.channels + n) * os.height + oy) * os.width + ox] = acc + bias[n];
        }
      }
    }
  }
}

void conv2d_backward(const WindowGeometry& g, std::size_t batch, const double* in, const double* weights,
                     const double* grad_out, double* grad_in, double* grad_w, double* grad_b) {
  const auto& is = g.in;
  const auto& os = g.out;
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t n = 0; n < os.channels; ++n) {
      for (std::size_t oy = 0; oy < os.height; ++oy) {
        for (std::size_t ox = 0; ox < os.width; ++ox) {
          const double go = grad_out[((b * os.channels + n) * os.height + oy) * os.width + ox];
          grad_b[n] += go;
          for (std::size_t c = 0; c < is.channels; ++c) {
            for (std::size_t ky = 0; ky < g.filter_h; ++ky) {
              for (std::size_t kx = 0; kx < g.filter_w; ++kx) {
                const long iy = static_cast<long>(oy * g.stride_h + ky) - static_cast<long>(g.pad_top);
                const long ix = static_cast<long>(ox * g.stride_w + kx) - static_cast<long>(g.pad_left);
                if (!inside(iy, is.height) || !inside(ix, is.width)) continue;
                const std::size_t xi = ((b * is.channels + c) * is.height + iy) * is.width + ix;
                const std::size_t wi = ((n * is.channels + c) * g.filter_h + ky) * g.filter_w + kx;
                grad_w[wi] += go * in[xi];
                if (grad_in) grad_in[xi] += weights[wi] * go;
              }
            }
          }
        }
      }
    }
  }
}

void max_pool_forward(const WindowGeometry& g, std::size_t batch, const double* in, double* out) {
  const auto& is = g.in;
  const auto& os = g.out;
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t c = 0; c < is.channels; ++c) {
      for (std::size_t oy = 0; oy < os.height; ++oy) {
        for (std::size_t ox = 0; ox < os.width; ++ox) {
          double best = in[((b * is.channels + c) * is.height + oy * g.stride_h) * is.width + ox * g.stride_w];
          for (std::size_t ky = 0; ky < g.filter_h; ++ky) {
            for (std::size_t kx = 0; kx < g.filter_w; ++kx) {
              const double v =
                  in[((b * is.channels + c) * is.height + oy * g.stride_h + ky) * is.width + ox * g.stride_w + kx];
              if (v > best) best = v;
            }
          }
          out[((b * os.channels + c) * os.height + oy) * os.width + ox] = best;
        }
      }
    }
  }
}

void avg_pool_forward(const WindowGeometry& g, std::size_t batch, const double* in, double* out) {
  const auto& is = g.in;
  const auto& os = g.out;
  const double count = static_cast<double>(g.filter_h * g.filter_w);
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t c = 0; c < is.channels; ++c) {
      for (std::size_t oy = 0; oy < os.height; ++oy) {
        for (std::size_t ox = 0; ox < os.width; ++ox) {
          double sum = 0.0;
          for (std::size_t ky = 0; ky < g.filter_h; ++ky) {
            for (std::size_t kx = 0; kx < g.filter_w; ++kx) {
              sum += in[((b * is.channels + c) * is.height + oy * g.stride_h + ky) * is.width + ox * g.stride_w + kx];
            }
          }
          out[((b * os.channels + c) * os.height + oy) * os.width + ox] = sum / count;
        }
      }
    }
  }
}

void dense_forward(std::size_t in_dim, std::size_t out_dim, std::size_t batch, const double* in,
                   const double* weights, const double* bias, double* out) {
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t o = 0; o < out_dim; ++o) {
      double acc = 0.0;
      for (std::size_t i = 0; i < in_dim; ++i) acc += weights[o * in_dim + i] * in[b * in_dim + i];
      out[b * out_dim + o] = acc + bias[o];
    }
  }
}

}  // namespace trendcnn::nn::reference
