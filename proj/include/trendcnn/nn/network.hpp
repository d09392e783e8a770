#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "trendcnn/nn/layer.hpp"
#include "trendcnn/nn/tensor.hpp"

namespace trendcnn::nn {

// Activations kept by forward() for backward(). acts[0] is the input batch,
// acts[l + 1] the output of layer l.
struct ForwardCache {
  std::size_t batch = 0;
  std::size_t stop = 0;  // number of layers evaluated
  std::vector<std::vector<double>> acts;
  std::vector<std::vector<std::uint32_t>> argmax;  // per layer, max-pool only

  std::span<const double> output() const { return acts.back(); }
};

// Sequential CNN with all parameters in one flat array.
class Network {
 public:
  struct ParamSlice {
    std::size_t kernel_offset = 0;
    std::size_t kernel_size = 0;
    std::size_t bias_offset = 0;
    std::size_t bias_size = 0;
  };

  // Validates the layer chain and Glorot-initializes kernels (biases zero).
  Network(Shape3 input, std::vector<LayerSpec> layers, std::uint64_t seed);

  const Shape3& input_shape() const noexcept { return input_; }
  const std::vector<LayerSpec>& layers() const noexcept { return layers_; }
  std::size_t layer_count() const noexcept { return layers_.size(); }
  // Shape after layer l (l < layer_count()).
  const Shape3& layer_output(std::size_t l) const { return shapes_[l + 1]; }
  const Shape3& layer_input(std::size_t l) const { return shapes_[l]; }
  const Shape3& output_shape() const { return shapes_.back(); }
  const ParamSlice& param_slice(std::size_t l) const { return slices_[l]; }
  std::uint64_t seed() const noexcept { return seed_; }

  std::size_t param_count() const noexcept { return params_.size(); }
  std::span<double> params() noexcept { return params_; }
  std::span<const double> params() const noexcept { return params_; }

  // Multiplier callers apply to raw pixel features before forward(); stored
  // with the weights so inference matches training.
  double input_scale() const noexcept { return input_scale_; }
  void set_input_scale(double scale) noexcept { input_scale_ = scale; }

  // Runs layers [0, stop). `input` holds batch * input_shape().size() values.
  ForwardCache forward(std::span<const double> input, std::size_t batch, std::size_t stop) const;
  ForwardCache forward(std::span<const double> input, std::size_t batch) const {
    return forward(input, batch, layer_count());
  }
  // Output of the full network, shape [batch, output size].
  Tensor predict(const Tensor& batch) const;

  // Gradient of the loss w.r.t. every parameter given dLoss/d(output of layer
  // cache.stop - 1). Overwrites `grad_params`. Per-sample gradients are summed
  // in sample order, so the result does not depend on the thread count.
  void backward(const ForwardCache& cache, std::span<const double> grad_out, std::span<double> grad_params) const;

  bool operator==(const Network& other) const {
    return input_ == other.input_ && layers_ == other.layers_ && params_ == other.params_ &&
           input_scale_ == other.input_scale_ && seed_ == other.seed_;
  }

 private:
  Shape3 input_;
  std::vector<LayerSpec> layers_;
  std::vector<Shape3> shapes_;
  std::vector<WindowGeometry> geometry_;
  std::vector<ParamSlice> slices_;
  std::vector<double> params_;
  double input_scale_ = 1.0;
  std::uint64_t seed_ = 0;
};

}  // namespace trendcnn::nn
