#include "trendcnn/nn/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "trendcnn/nn/train.hpp"

namespace trendcnn::nn {

GradCheckResult grad_check(Network net, std::span<const double> input, std::size_t batch,
                           std::span<const double> target, const LossSpec& loss, double epsilon) {
  const std::size_t stop = loss_stop(net, loss);
  auto loss_at = [&] {
    const auto cache = net.forward(input, batch, stop);
    return loss_and_grad(loss, cache.output(), target, batch).value;
  };

  GradCheckResult result;
  {
    const auto cache = net.forward(input, batch, stop);
    const auto l = loss_and_grad(loss, cache.output(), target, batch);
    result.analytic.assign(net.param_count(), 0.0);
    net.backward(cache, l.grad, result.analytic);
  }

  auto params = net.params();
  result.numeric.resize(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double saved = params[i];
    params[i] = saved + epsilon;
    const double up = loss_at();
    params[i] = saved - epsilon;
    const double down = loss_at();
    params[i] = saved;
    result.numeric[i] = (up - down) / (2.0 * epsilon);

    const double a = result.analytic[i], n = result.numeric[i];
    const double rel = std::abs(a - n) / std::max({std::abs(a), std::abs(n), 1e-6});
    if (rel > result.max_relative_error) {
      result.max_relative_error = rel;
      result.worst_param = i;
    }
  }
  return result;
}

}  // namespace trendcnn::nn
