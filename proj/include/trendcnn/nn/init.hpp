#pragma once

#include <cstdint>
#include <vector>

#include "trendcnn/nn/tensor.hpp"

namespace trendcnn::nn {

// i.i.d. uniform on [-L, L], L = sqrt(6 / (fan_in + fan_out)).
Tensor glorot_uniform_init(std::vector<std::size_t> shape, std::size_t fan_in, std::size_t fan_out,
                           std::uint64_t seed);

double glorot_limit(std::size_t fan_in, std::size_t fan_out);

}  // namespace trendcnn::nn
