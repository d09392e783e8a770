#include "trendcnn/nn/init.hpp"

#include <cmath>

#include "trendcnn/error.hpp"
#include "trendcnn/random.hpp"

namespace trendcnn::nn {

double glorot_limit(std::size_t fan_in, std::size_t fan_out) {
  if (fan_in == 0 || fan_out == 0) throw ValidationError("glorot init needs positive fans");
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

Tensor glorot_uniform_init(std::vector<std::size_t> shape, std::size_t fan_in, std::size_t fan_out,
                           std::uint64_t seed) {
  const double limit = glorot_limit(fan_in, fan_out);
  Tensor t(std::move(shape));
  Rng rng(seed);
  for (auto& v : t.data) v = limit * (2.0 * uniform01(rng) - 1.0);
  return t;
}

}  // namespace trendcnn::nn
