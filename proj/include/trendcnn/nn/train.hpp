#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "trendcnn/dataset.hpp"
#include "trendcnn/error.hpp"
#include "trendcnn/nn/loss.hpp"
#include "trendcnn/nn/network.hpp"

namespace trendcnn::nn {

struct TrainConfig {
  LossSpec loss;
  double learning_rate = 0.001;
  std::size_t minibatch = 64;
  std::size_t iterations = 1000;
  std::uint64_t seed = 1;
};

struct TrainResult {
  Network network;
  std::vector<double> history;  // minibatch loss per iteration
};

class TrainingDiverged : public Error {
 public:
  TrainingDiverged(std::size_t iteration, double value);
  std::size_t iteration() const noexcept { return iteration_; }

 private:
  std::size_t iteration_;
};

// Number of layers the loss sees: a trailing Softmax is skipped for CeSoftmax,
// which takes raw scores.
std::size_t loss_stop(const Network& net, const LossSpec& loss);

// Plain minibatch SGD, w <- w - lr * dL/dw. Minibatches are drawn from a
// seeded per-epoch permutation without replacement; features are multiplied
// by net.input_scale().
TrainResult sgd_train(Network net, const Dataset& data, const TrainConfig& cfg,
                      const std::function<void(std::size_t, double)>& on_iteration = {});

}  // namespace trendcnn::nn
