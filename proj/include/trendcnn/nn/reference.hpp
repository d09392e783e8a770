#pragma once

#include <cstddef>

#include "trendcnn/nn/layer.hpp"

// Serial, straight-from-the-definition implementations kept as test oracles
// and as the benchmark baseline. Not used on the training path.
namespace trendcnn::nn::reference {

// For every output element: sum over in-bounds (c, ky, kx) of w * x, then + bias.
void conv2d_forward(const WindowGeometry& g, std::size_t batch, const double* in, const double* weights,
                    const double* bias, double* out);

void conv2d_backward(const WindowGeometry& g, std::size_t batch, const double* in, const double* weights,
                     const double* grad_out, double* grad_in, double* grad_w, double* grad_b);

void max_pool_forward(const WindowGeometry& g, std::size_t batch, const double* in, double* out);
void avg_pool_forward(const WindowGeometry& g, std::size_t batch, const double* in, double* out);
void dense_forward(std::size_t in_dim, std::size_t out_dim, std::size_t batch, const double* in,
                   const double* weights, const double* bias, double* out);

}  // namespace trendcnn::nn::reference
