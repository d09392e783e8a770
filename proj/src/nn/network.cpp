#include "trendcnn/nn/network.hpp"

#include <algorithm>

#include "trendcnn/error.hpp"
#include "trendcnn/nn/init.hpp"
#include "trendcnn/nn/kernels.hpp"
#include "trendcnn/random.hpp"

namespace trendcnn::nn {

namespace {

bool is_window(LayerKind k) { return k == LayerKind::Conv2d || k == LayerKind::MaxPool || k == LayerKind::AvgPool; }

}  // namespace

Network::Network(Shape3 input, std::vector<LayerSpec> layers, std::uint64_t seed)
    : input_(input), layers_(std::move(layers)), seed_(seed) {
  if (input_.size() == 0) throw ShapeError("network input shape is empty");
  shapes_.push_back(input_);
  geometry_.resize(layers_.size());
  std::size_t offset = 0;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& spec = layers_[l];
    const Shape3 in = shapes_.back();
    try {
      if (is_window(spec.kind)) geometry_[l] = window_geometry(in, spec);
      shapes_.push_back(layer_output_shape(in, spec));
    } catch (const ShapeError& e) {
      throw ShapeError("layer " + std::to_string(l) + " (" + to_string(spec) + ") on input " + to_string(in) + ": " +
                       e.what());
    }
    ParamSlice slice;
    slice.kernel_offset = offset;
    slice.kernel_size = layer_kernel_size(in, spec);
    slice.bias_offset = offset + slice.kernel_size;
    slice.bias_size = layer_bias_size(in, spec);
    offset += slice.kernel_size + slice.bias_size;
    slices_.push_back(slice);
  }
  params_.assign(offset, 0.0);
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& spec = layers_[l];
    const auto& slice = slices_[l];
    if (slice.kernel_size == 0) continue;
    std::size_t fan_in = 0, fan_out = 0;
    if (spec.kind == LayerKind::Conv2d) {
      fan_in = shapes_[l].channels * spec.filter_h * spec.filter_w;
      fan_out = spec.filters * spec.filter_h * spec.filter_w;
    } else {
      fan_in = shapes_[l].size();
      fan_out = spec.units;
    }
    const Tensor kernel = glorot_uniform_init({slice.kernel_size}, fan_in, fan_out, mix_seed(seed_, l));
    std::copy(kernel.data.begin(), kernel.data.end(), params_.begin() + static_cast<long>(slice.kernel_offset));
  }
}

ForwardCache Network::forward(std::span<const double> input, std::size_t batch, std::size_t stop) const {
  if (stop > layers_.size()) throw ShapeError("forward stop beyond last layer");
  if (input.size() != batch * input_.size()) {
    throw ShapeError("input batch has " + std::to_string(input.size()) + " values, expected " +
                     std::to_string(batch) + " x " + to_string(input_));
  }
  ForwardCache cache;
  cache.batch = batch;
  cache.stop = stop;
  cache.acts.reserve(stop + 1);
  cache.acts.emplace_back(input.begin(), input.end());
  cache.argmax.resize(stop);

  for (std::size_t l = 0; l < stop; ++l) {
    const auto& spec = layers_[l];
    const std::size_t in_size = shapes_[l].size();
    const std::size_t out_size = shapes_[l + 1].size();
    const double* in = cache.acts[l].data();
    std::vector<double> out(batch * out_size);
    if (spec.kind == LayerKind::MaxPool) cache.argmax[l].resize(batch * out_size);
    std::uint32_t* argmax = cache.argmax[l].data();
    const double* kernel = params_.data() + slices_[l].kernel_offset;
    const double* bias = params_.data() + slices_[l].bias_offset;
    const auto& g = geometry_[l];

#pragma omp parallel for schedule(static)
    for (long b = 0; b < static_cast<long>(batch); ++b) {
      const double* x = in + b * in_size;
      double* y = out.data() + b * out_size;
      switch (spec.kind) {
        case LayerKind::Conv2d: kernels::conv2d_forward(g, x, kernel, bias, y); break;
        case LayerKind::MaxPool: kernels::max_pool_forward(g, x, y, argmax + b * out_size); break;
        case LayerKind::AvgPool: kernels::avg_pool_forward(g, x, y); break;
        case LayerKind::Dense: kernels::dense_forward(in_size, out_size, x, kernel, bias, y); break;
        case LayerKind::Relu: kernels::relu_forward(in_size, x, y); break;
        case LayerKind::Sigmoid: kernels::sigmoid_forward(in_size, x, y); break;
        case LayerKind::Softmax: kernels::softmax_forward(in_size, x, y); break;
      }
    }
    cache.acts.push_back(std::move(out));
  }
  return cache;
}

Tensor Network::predict(const Tensor& batch) const {
  if (batch.shape.empty()) throw ShapeError("predict needs a leading batch dimension");
  const std::size_t n = batch.shape[0];
  auto cache = forward(batch.data, n);
  return Tensor({n, output_shape().size()}, std::move(cache.acts.back()));
}

void Network::backward(const ForwardCache& cache, std::span<const double> grad_out,
                       std::span<double> grad_params) const {
  const std::size_t batch = cache.batch;
  const std::size_t stop = cache.stop;
  if (grad_out.size() != batch * shapes_[stop].size()) throw ShapeError("output gradient size mismatch");
  if (grad_params.size() != params_.size()) throw ShapeError("parameter gradient size mismatch");

  const std::size_t nparams = params_.size();
  std::vector<double> per_sample(batch * nparams, 0.0);

#pragma omp parallel for schedule(static)
  for (long b = 0; b < static_cast<long>(batch); ++b) {
    double* grads = per_sample.data() + b * nparams;
    std::vector<double> delta(grad_out.begin() + b * shapes_[stop].size(),
                              grad_out.begin() + (b + 1) * shapes_[stop].size());
    std::vector<double> prev;
    for (std::size_t l = stop; l-- > 0;) {
      const auto& spec = layers_[l];
      const std::size_t in_size = shapes_[l].size();
      const std::size_t out_size = shapes_[l + 1].size();
      const double* x = cache.acts[l].data() + b * in_size;
      const double* y = cache.acts[l + 1].data() + b * out_size;
      const bool need_input_grad = l > 0;
      const auto& slice = slices_[l];
      const double* kernel = params_.data() + slice.kernel_offset;
      double* gk = grads + slice.kernel_offset;
      double* gb = grads + slice.bias_offset;
      prev.assign(in_size, 0.0);
      switch (spec.kind) {
        case LayerKind::Conv2d:
          kernels::conv2d_backward(geometry_[l], x, kernel, delta.data(), need_input_grad ? prev.data() : nullptr, gk,
                                   gb);
          break;
        case LayerKind::MaxPool:
          kernels::max_pool_backward(geometry_[l], cache.argmax[l].data() + b * out_size, delta.data(), prev.data());
          break;
        case LayerKind::AvgPool: kernels::avg_pool_backward(geometry_[l], delta.data(), prev.data()); break;
        case LayerKind::Dense:
          kernels::dense_backward(in_size, out_size, x, kernel, delta.data(), need_input_grad ? prev.data() : nullptr,
                                  gk, gb);
          break;
        case LayerKind::Relu: kernels::relu_backward(in_size, x, delta.data(), prev.data()); break;
        case LayerKind::Sigmoid: kernels::sigmoid_backward(in_size, y, delta.data(), prev.data()); break;
        case LayerKind::Softmax: kernels::softmax_backward(in_size, y, delta.data(), prev.data()); break;
      }
      std::swap(delta, prev);
    }
  }

  std::fill(grad_params.begin(), grad_params.end(), 0.0);
  for (std::size_t b = 0; b < batch; ++b) {
    const double* src = per_sample.data() + b * nparams;
    for (std::size_t i = 0; i < nparams; ++i) grad_params[i] += src[i];
  }
}

}  // namespace trendcnn::nn
