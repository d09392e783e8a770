#include "trendcnn/nn/train.hpp"

#include <cmath>
#include <numeric>

#include "trendcnn/random.hpp"

namespace trendcnn::nn {

TrainingDiverged::TrainingDiverged(std::size_t iteration, double value)
    : Error("diverged", "training diverged at iteration " + std::to_string(iteration) + ": loss " +
                            std::to_string(value)),
      iteration_(iteration) {}

std::size_t loss_stop(const Network& net, const LossSpec& loss) {
  const auto& layers = net.layers();
  if (loss.kind == LossKind::CeSoftmax && !layers.empty() && layers.back().kind == LayerKind::Softmax) {
    return layers.size() - 1;
  }
  return layers.size();
}

namespace {

// Seeded Fisher-Yates; std::shuffle's algorithm is implementation-defined.
void shuffle(std::vector<std::size_t>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[uniform_index(rng, i)]);
}

}  // namespace

TrainResult sgd_train(Network net, const Dataset& data, const TrainConfig& cfg,
                      const std::function<void(std::size_t, double)>& on_iteration) {
  if (data.empty()) throw ValidationError("training set is empty");
  if (cfg.minibatch == 0) throw ValidationError("minibatch must be positive");
  if (!(cfg.learning_rate >= 0)) throw ValidationError("learning rate must be non-negative");
  const std::size_t in_dim = net.input_shape().size();
  if (data.feature_dim() != in_dim) {
    throw ShapeError("dataset has " + std::to_string(data.feature_dim()) + " features, network expects " +
                     std::to_string(in_dim));
  }
  const std::size_t stop = loss_stop(net, cfg.loss);
  const std::size_t out_dim = stop == 0 ? in_dim : net.layer_output(stop - 1).size();
  if (data.label_dim() != out_dim) {
    throw ShapeError("dataset has " + std::to_string(data.label_dim()) + " labels, network output is " +
                     std::to_string(out_dim));
  }

  Rng rng(cfg.seed);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  shuffle(order, rng);
  std::size_t cursor = 0;

  const std::size_t batch = std::min(cfg.minibatch, data.size());
  std::vector<double> inputs(batch * in_dim);
  std::vector<double> targets(batch * out_dim);
  std::vector<double> grads(net.param_count());

  TrainResult result{std::move(net), {}};
  Network& model = result.network;
  result.history.reserve(cfg.iterations);

  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    for (std::size_t b = 0; b < batch; ++b) {
      if (cursor == order.size()) {
        shuffle(order, rng);
        cursor = 0;
      }
      const std::size_t idx = order[cursor++];
      data.features(idx, std::span<double>(inputs).subspan(b * in_dim, in_dim), model.input_scale());
      const auto labels = data.labels(idx);
      std::copy(labels.begin(), labels.end(), targets.begin() + static_cast<long>(b * out_dim));
    }
    const auto cache = model.forward(inputs, batch, stop);
    const auto loss = loss_and_grad(cfg.loss, cache.output(), targets, batch);
    if (!std::isfinite(loss.value)) throw TrainingDiverged(it, loss.value);
    model.backward(cache, loss.grad, grads);
    auto params = model.params();
    for (std::size_t i = 0; i < params.size(); ++i) params[i] -= cfg.learning_rate * grads[i];
    result.history.push_back(loss.value);
    if (on_iteration) on_iteration(it, loss.value);
  }
  return result;
}

}  // namespace trendcnn::nn
