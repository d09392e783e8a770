#pragma once

#include <span>

#include "trendcnn/nn/loss.hpp"
#include "trendcnn/nn/network.hpp"

namespace trendcnn::nn {

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t worst_param = 0;
  std::vector<double> analytic;
  std::vector<double> numeric;
};

// Compares backprop gradients of every parameter with central differences
// (f(w+eps) - f(w-eps)) / 2eps. Relative error is |a - n| / max(|a|, |n|, 1e-6);
// the floor keeps parameters with a vanishing gradient from dominating.
GradCheckResult grad_check(Network net, std::span<const double> input, std::size_t batch,
                           std::span<const double> target, const LossSpec& loss, double epsilon = 1e-5);

}  // namespace trendcnn::nn
