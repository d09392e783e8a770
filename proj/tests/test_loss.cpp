#include <doctest.h>

#include "test_util.hpp"
#include "trendcnn/error.hpp"
#include "trendcnn/nn/loss.hpp"

using namespace trendcnn;
using namespace trendcnn::nn;

namespace {

std::vector<double> numeric_grad(const LossSpec& spec, std::vector<double> pred, const std::vector<double>& target,
                                 std::size_t batch) {
  std::vector<double> g(pred.size());
  const double eps = 1e-6;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double keep = pred[i];
    pred[i] = keep + eps;
    const double up = loss_and_grad(spec, pred, target, batch).value;
    pred[i] = keep - eps;
    const double down = loss_and_grad(spec, pred, target, batch).value;
    pred[i] = keep;
    g[i] = (up - down) / (2 * eps);
  }
  return g;
}

}  // namespace

TEST_SUITE("loss") {

TEST_CASE("hand-computed values") {
  std::vector<double> p{0.8, 0.4}, y{1, 0};
  CHECK(loss_and_grad({LossKind::SquaredError}, p, y, 2).value == doctest::Approx((0.04 + 0.16) / 2));
  CHECK(loss_and_grad({LossKind::WeightedBce, 1.0}, p, y, 2).value ==
        doctest::Approx(-(std::log(0.8) + std::log(0.6)) / 2));
  CHECK(loss_and_grad({LossKind::WeightedBce, 3.0}, p, y, 2).value ==
        doctest::Approx(-(3 * std::log(0.8) + std::log(0.6)) / 2));
  // Soft counts: TP = 0.8, sum p = 1.2, sum y = 1.
  CHECK(loss_and_grad({LossKind::FMeasure}, p, y, 2).value == doctest::Approx(1 - 1.6 / 2.2));
  std::vector<double> s{1, 2, 3}, t{0, 0, 1};
  const double lse = std::log(std::exp(1) + std::exp(2) + std::exp(3));
  CHECK(loss_and_grad({LossKind::CeSoftmax}, s, t, 1).value == doctest::Approx(lse - 3));
}

TEST_CASE("analytic gradients match central differences") {
  Rng rng(61);
  for (auto kind : {LossKind::WeightedBce, LossKind::FMeasure, LossKind::SquaredError, LossKind::CeSoftmax}) {
    for (int trial = 0; trial < 20; ++trial) {
      const std::size_t batch = 1 + uniform_index(rng, 5);
      const std::size_t dim = kind == LossKind::CeSoftmax ? 3 : 1;
      std::vector<double> p(batch * dim), y(batch * dim);
      for (auto& v : p) v = kind == LossKind::CeSoftmax || kind == LossKind::SquaredError ? 4 * uniform01(rng) - 2
                                                                                          : 0.05 + 0.9 * uniform01(rng);
      for (std::size_t b = 0; b < batch; ++b) {
        if (kind == LossKind::CeSoftmax) {
          y[b * dim + uniform_index(rng, dim)] = 1;
        } else if (kind == LossKind::SquaredError) {
          y[b] = uniform01(rng);
        } else {
          y[b] = static_cast<double>(uniform_index(rng, 2));
        }
      }
      if (kind == LossKind::FMeasure) y[0] = 1;
      const LossSpec spec{kind, 1.0 + 4 * uniform01(rng)};
      const auto analytic = loss_and_grad(spec, p, y, batch).grad;
      const auto numeric = numeric_grad(spec, p, y, batch);
      for (std::size_t i = 0; i < p.size(); ++i) {
        CHECK_MESSAGE(analytic[i] == doctest::Approx(numeric[i]).epsilon(1e-5), to_string(kind));
      }
    }
  }
}

TEST_CASE("loss kind names") {
  for (auto kind : {LossKind::WeightedBce, LossKind::FMeasure, LossKind::SquaredError, LossKind::CeSoftmax}) {
    CHECK(parse_loss_kind(to_string(kind)) == kind);
  }
  CHECK_THROWS(parse_loss_kind("hinge"));
}

TEST_CASE("size mismatch") {
  std::vector<double> p{0.5, 0.5}, y{1};
  CHECK_THROWS(loss_and_grad({LossKind::SquaredError}, p, y, 2));
}

}  // TEST_SUITE
