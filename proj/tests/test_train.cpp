#include <doctest.h>

#include "test_util.hpp"
#include "trendcnn/error.hpp"
#include "trendcnn/nn/train.hpp"

using namespace trendcnn;
using namespace trendcnn::nn;

namespace {

// Two separable blobs: label 1 iff the first half of the pixels is bright.
Dataset blobs(std::size_t n, std::uint64_t seed) {
  Dataset d(1, 16);
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    const bool pos = i % 2 == 0;
    std::vector<std::uint8_t> px(16);
    for (std::size_t k = 0; k < 16; ++k) {
      const bool bright = (k < 8) == pos;
      px[k] = static_cast<std::uint8_t>((bright ? 180 : 20) + uniform_index(rng, 60));
    }
    std::vector<double> label{pos ? 1.0 : 0.0};
    d.add(label, px);
  }
  return d;
}

Network small_net(std::uint64_t seed) {
  return Network({1, 4, 4}, {LayerSpec::conv2d(2, 2, 2, 1, 1), LayerSpec::relu(), LayerSpec::dense(1),
                             LayerSpec::sigmoid()},
                 seed);
}

}  // namespace

TEST_SUITE("train") {

TEST_CASE("sgd lowers the loss on a separable problem") {
  const auto data = blobs(64, 1);
  auto net = small_net(2);
  net.set_input_scale(1.0 / 255.0);
  TrainConfig cfg{{LossKind::WeightedBce, 1.0}, 0.5, 8, 300, 3};
  const auto r = sgd_train(net, data, cfg);
  REQUIRE(r.history.size() == 300);
  double early = 0, late = 0;
  for (std::size_t i = 0; i < 20; ++i) {
    early += r.history[i];
    late += r.history[r.history.size() - 1 - i];
  }
  CHECK(late < 0.5 * early);
  std::vector<double> x(16);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    data.features(i, x, 1.0 / 255.0);
    const double p = r.network.forward(x, 1).output()[0];
    correct += (p >= 0.5) == (data.labels(i)[0] == 1.0);
  }
  CHECK(correct >= 60);
}

TEST_CASE("training is deterministic for a seed") {
  const auto data = blobs(40, 4);
  TrainConfig cfg{{LossKind::SquaredError}, 0.1, 5, 50, 11};
  const auto a = sgd_train(small_net(5), data, cfg);
  const auto b = sgd_train(small_net(5), data, cfg);
  CHECK(a.network == b.network);
  CHECK(a.history == b.history);
  cfg.seed = 12;
  CHECK_FALSE(sgd_train(small_net(5), data, cfg).history == a.history);
}

TEST_CASE("zero learning rate leaves parameters unchanged") {
  const auto data = blobs(10, 6);
  const auto net = small_net(7);
  TrainConfig cfg{{LossKind::SquaredError}, 0.0, 4, 10, 1};
  CHECK(sgd_train(net, data, cfg).network == net);
}

TEST_CASE("callback sees every iteration") {
  const auto data = blobs(10, 6);
  std::vector<std::size_t> seen;
  TrainConfig cfg{{LossKind::SquaredError}, 0.01, 4, 7, 1};
  sgd_train(small_net(7), data, cfg, [&](std::size_t it, double) { seen.push_back(it); });
  CHECK(seen.size() == 7);
}

TEST_CASE("divergence is reported") {
  Dataset d(1, 16);
  std::vector<double> label{1e6};
  std::vector<double> x(16, 1e3);
  for (int i = 0; i < 8; ++i) d.add(label, x);
  Network net({1, 4, 4}, {LayerSpec::dense(4), LayerSpec::dense(1)}, 1);
  TrainConfig cfg{{LossKind::SquaredError}, 10.0, 4, 200, 1};
  CHECK_THROWS_AS(sgd_train(net, d, cfg), TrainingDiverged);
}

TEST_CASE("shape and config validation") {
  const auto data = blobs(10, 6);
  TrainConfig cfg{{LossKind::SquaredError}, 0.01, 0, 1, 1};
  CHECK_THROWS_AS(sgd_train(small_net(1), data, cfg), ValidationError);
  cfg.minibatch = 2;
  Network wrong({1, 2, 2}, {LayerSpec::dense(1)}, 1);
  CHECK_THROWS_AS(sgd_train(wrong, data, cfg), ShapeError);
  CHECK_THROWS_AS(sgd_train(small_net(1), Dataset(1, 16), cfg), ValidationError);
}

TEST_CASE("loss_stop skips a trailing softmax for cross-entropy only") {
  Network net({1, 1, 4}, {LayerSpec::dense(3), LayerSpec::softmax()}, 1);
  CHECK(loss_stop(net, {LossKind::CeSoftmax}) == 1);
  CHECK(loss_stop(net, {LossKind::SquaredError}) == 2);
}

}  // TEST_SUITE
