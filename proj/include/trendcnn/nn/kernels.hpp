#pragma once

#include <cstddef>
#include <cstdint>

#include "trendcnn/nn/layer.hpp"

// Per-sample compute kernels and their OpenMP batch drivers. Every output
// element accumulates its terms in the same order as the naive reference in
// reference.hpp (channel, filter row, filter column; bias last), so results
// are bit-identical to it.
namespace trendcnn::nn::kernels {

// weights: [filters][in.channels][filter_h][filter_w]
void conv2d_forward(const WindowGeometry& g, const double* in, const double* weights, const double* bias, double* out);
// grad_in may be null. grad_w / grad_b are accumulated into.
void conv2d_backward(const WindowGeometry& g, const double* in, const double* weights, const double* grad_out,
                     double* grad_in, double* grad_w, double* grad_b);

// argmax receives the flat input index of each output's maximum (first on ties).
void max_pool_forward(const WindowGeometry& g, const double* in, double* out, std::uint32_t* argmax);
void max_pool_backward(const WindowGeometry& g, const std::uint32_t* argmax, const double* grad_out, double* grad_in);
void avg_pool_forward(const WindowGeometry& g, const double* in, double* out);
void avg_pool_backward(const WindowGeometry& g, const double* grad_out, double* grad_in);

// weights: [out_dim][in_dim]
void dense_forward(std::size_t in_dim, std::size_t out_dim, const double* in, const double* weights,
                   const double* bias, double* out);
void dense_backward(std::size_t in_dim, std::size_t out_dim, const double* in, const double* weights,
                    const double* grad_out, double* grad_in, double* grad_w, double* grad_b);

void relu_forward(std::size_t n, const double* in, double* out);
void relu_backward(std::size_t n, const double* in, const double* grad_out, double* grad_in);
void sigmoid_forward(std::size_t n, const double* in, double* out);
void sigmoid_backward(std::size_t n, const double* out, const double* grad_out, double* grad_in);
void softmax_forward(std::size_t n, const double* in, double* out);
void softmax_backward(std::size_t n, const double* out, const double* grad_out, double* grad_in);

// Batch drivers: samples are independent and processed in parallel.
void conv2d_forward_batch(const WindowGeometry& g, std::size_t batch, const double* in, const double* weights,
                          const double* bias, double* out);

}  // namespace trendcnn::nn::kernels
