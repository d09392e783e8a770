#pragma once

#include <cstddef>
#include <string>

namespace trendcnn::nn {

enum class LayerKind { Conv2d, MaxPool, AvgPool, Dense, Relu, Sigmoid, Softmax };
enum class Padding { Same, Valid };

struct Shape3 {
  std::size_t channels = 0;
  std::size_t height = 0;
  std::size_t width = 0;

  std::size_t size() const noexcept { return channels * height * width; }
  bool operator==(const Shape3&) const = default;
};

std::string to_string(const Shape3& shape);

struct LayerSpec {
  LayerKind kind = LayerKind::Relu;
  std::size_t filter_h = 0;
  std::size_t filter_w = 0;
  std::size_t filters = 0;  // conv output channels
  std::size_t stride_h = 1;
  std::size_t stride_w = 1;
  Padding padding = Padding::Valid;
  std::size_t units = 0;  // dense output size

  static LayerSpec conv2d(std::size_t fh, std::size_t fw, std::size_t n, std::size_t sh, std::size_t sw,
                          Padding padding = Padding::Same);
  static LayerSpec max_pool(std::size_t fh, std::size_t fw, std::size_t sh, std::size_t sw);
  static LayerSpec avg_pool(std::size_t fh, std::size_t fw, std::size_t sh, std::size_t sw);
  static LayerSpec dense(std::size_t units);
  static LayerSpec relu() { return {LayerKind::Relu}; }
  static LayerSpec sigmoid() { return {LayerKind::Sigmoid}; }
  static LayerSpec softmax() { return {LayerKind::Softmax}; }

  bool operator==(const LayerSpec&) const = default;
};

std::string to_string(const LayerSpec& spec);
LayerSpec parse_layer_spec(const std::string& text);

// Sliding-window geometry shared by convolution and pooling.
struct WindowGeometry {
  Shape3 in;
  Shape3 out;
  std::size_t filter_h, filter_w;
  std::size_t stride_h, stride_w;
  std::size_t pad_top, pad_left;  // remainder of odd Same padding goes bottom/right
};

// floor((in + pad_total - f) / s) + 1; Same uses out = ceil(in / s).
std::size_t window_output_dim(std::size_t in, std::size_t filter, std::size_t stride, Padding padding);
std::size_t same_padding_total(std::size_t in, std::size_t filter, std::size_t stride);

// Throws ShapeError when the spec cannot be applied to `in`.
WindowGeometry window_geometry(const Shape3& in, const LayerSpec& spec);
Shape3 layer_output_shape(const Shape3& in, const LayerSpec& spec);
std::size_t layer_kernel_size(const Shape3& in, const LayerSpec& spec);
std::size_t layer_bias_size(const Shape3& in, const LayerSpec& spec);

}  // namespace trendcnn::nn
