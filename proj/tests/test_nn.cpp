#include <doctest.h>

#include <cstring>

#include "oracles.hpp"
#include "test_util.hpp"
#include "trendcnn/error.hpp"
#include "trendcnn/nn/init.hpp"
#include "trendcnn/nn/kernels.hpp"
#include "trendcnn/nn/network.hpp"
#include "trendcnn/nn/reference.hpp"

using namespace trendcnn;
using namespace trendcnn::nn;

namespace {

std::vector<double> random_vec(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (auto& x : v) x = 2.0 * uniform01(rng) - 1.0;
  return v;
}

bool bit_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_SUITE("nn") {

TEST_CASE("window output dims") {
  CHECK(window_output_dim(25, 5, 2, Padding::Same) == 13);
  CHECK(window_output_dim(25, 5, 2, Padding::Valid) == 11);
  CHECK(window_output_dim(48, 25, 5, Padding::Same) == 10);
  CHECK(window_output_dim(64, 25, 5, Padding::Valid) == 8);
  CHECK(same_padding_total(25, 5, 2) == 4);
  CHECK(same_padding_total(4, 1, 2) == 0);
  CHECK_THROWS_AS(window_geometry({1, 3, 3}, LayerSpec::conv2d(5, 5, 1, 1, 1, Padding::Valid)), ShapeError);
}

TEST_CASE("layer spec text round-trip") {
  for (const auto& s : {LayerSpec::conv2d(5, 3, 8, 2, 1), LayerSpec::conv2d(1, 1, 2, 1, 1, Padding::Valid),
                        LayerSpec::max_pool(2, 2, 2, 2), LayerSpec::avg_pool(3, 2, 1, 2), LayerSpec::dense(7),
                        LayerSpec::relu(), LayerSpec::sigmoid(), LayerSpec::softmax()}) {
    CHECK(parse_layer_spec(to_string(s)) == s);
  }
  CHECK_THROWS(parse_layer_spec("conv2d 1 2"));
  CHECK_THROWS(parse_layer_spec("lstm 4"));
}

TEST_CASE("conv forward equals an independent oracle bit-exactly") {
  Rng rng(51);
  for (int trial = 0; trial < 100; ++trial) {
    const Shape3 in{1 + uniform_index(rng, 3), 1 + uniform_index(rng, 12), 1 + uniform_index(rng, 12)};
    const bool same = uniform_index(rng, 2) == 0;
    std::size_t fh = 1 + uniform_index(rng, 5), fw = 1 + uniform_index(rng, 5);
    if (!same) {
      fh = std::min(fh, in.height);
      fw = std::min(fw, in.width);
    }
    const std::size_t sh = 1 + uniform_index(rng, 3), sw = 1 + uniform_index(rng, 3);
    const std::size_t filters = 1 + uniform_index(rng, 4);
    const std::size_t batch = 1 + uniform_index(rng, 3);
    const auto spec = LayerSpec::conv2d(fh, fw, filters, sh, sw, same ? Padding::Same : Padding::Valid);
    const auto g = window_geometry(in, spec);
    const auto x = random_vec(rng, batch * in.size());
    const auto w = random_vec(rng, filters * in.channels * fh * fw);
    const auto bias = random_vec(rng, filters);
    Shape3 os;
    const auto expected = oracle::conv2d(in, filters, fh, fw, sh, sw, same, batch, x, w, bias, os);
    REQUIRE(g.out == os);
    std::vector<double> got(expected.size()), ref(expected.size());
    kernels::conv2d_forward_batch(g, batch, x.data(), w.data(), bias.data(), got.data());
    reference::conv2d_forward(g, batch, x.data(), w.data(), bias.data(), ref.data());
    CHECK(bit_equal(got, expected));
    CHECK(bit_equal(ref, expected));
  }
}

TEST_CASE("conv backward equals the reference") {
  Rng rng(52);
  for (int trial = 0; trial < 30; ++trial) {
    const Shape3 in{1 + uniform_index(rng, 3), 3 + uniform_index(rng, 8), 3 + uniform_index(rng, 8)};
    const auto spec = LayerSpec::conv2d(1 + uniform_index(rng, 3), 1 + uniform_index(rng, 3), 2, 1 + uniform_index(rng, 2),
                                        1 + uniform_index(rng, 2));
    const auto g = window_geometry(in, spec);
    const auto x = random_vec(rng, in.size());
    const auto w = random_vec(rng, layer_kernel_size(in, spec));
    const auto go = random_vec(rng, g.out.size());
    std::vector<double> gi1(in.size()), gw1(w.size()), gb1(2), gi2(in.size()), gw2(w.size()), gb2(2);
    kernels::conv2d_backward(g, x.data(), w.data(), go.data(), gi1.data(), gw1.data(), gb1.data());
    reference::conv2d_backward(g, 1, x.data(), w.data(), go.data(), gi2.data(), gw2.data(), gb2.data());
    for (std::size_t i = 0; i < gi1.size(); ++i) CHECK(gi1[i] == doctest::Approx(gi2[i]).epsilon(1e-12));
    for (std::size_t i = 0; i < gw1.size(); ++i) CHECK(gw1[i] == doctest::Approx(gw2[i]).epsilon(1e-12));
    for (std::size_t i = 0; i < gb1.size(); ++i) CHECK(gb1[i] == doctest::Approx(gb2[i]).epsilon(1e-12));
  }
}

TEST_CASE("pooling and dense match the reference") {
  Rng rng(53);
  const Shape3 in{2, 6, 7};
  const auto x = random_vec(rng, 2 * in.size());
  for (const auto& spec : {LayerSpec::max_pool(2, 2, 2, 2), LayerSpec::avg_pool(3, 2, 1, 2)}) {
    const auto g = window_geometry(in, spec);
    std::vector<double> a(g.out.size()), b(2 * g.out.size());
    std::vector<std::uint32_t> arg(g.out.size());
    if (spec.kind == LayerKind::MaxPool) {
      kernels::max_pool_forward(g, x.data() + in.size(), a.data(), arg.data());
      reference::max_pool_forward(g, 2, x.data(), b.data());
      for (std::size_t i = 0; i < a.size(); ++i) CHECK(x[in.size() + arg[i]] == a[i]);
    } else {
      kernels::avg_pool_forward(g, x.data() + in.size(), a.data());
      reference::avg_pool_forward(g, 2, x.data(), b.data());
    }
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[g.out.size() + i]).epsilon(1e-14));
  }
  const auto w = random_vec(rng, 5 * in.size());
  const auto bias = random_vec(rng, 5);
  std::vector<double> a(5), b(10);
  kernels::dense_forward(in.size(), 5, x.data(), w.data(), bias.data(), a.data());
  reference::dense_forward(in.size(), 5, 2, x.data(), w.data(), bias.data(), b.data());
  for (std::size_t i = 0; i < 5; ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("activations") {
  std::vector<double> x{-1, 0, 2}, y(3);
  kernels::relu_forward(3, x.data(), y.data());
  CHECK(y == std::vector<double>{0, 0, 2});
  kernels::sigmoid_forward(3, x.data(), y.data());
  CHECK(y[1] == 0.5);
  kernels::softmax_forward(3, x.data(), y.data());
  CHECK(y[0] + y[1] + y[2] == doctest::Approx(1.0));
  std::vector<double> big{1000, 1000, -1000};
  kernels::softmax_forward(3, big.data(), y.data());
  CHECK(y[0] == doctest::Approx(0.5));
  CHECK(std::isfinite(y[2]));
}

TEST_CASE("glorot init range and determinism") {
  const double lim = glorot_limit(30, 20);
  CHECK(lim == doctest::Approx(std::sqrt(6.0 / 50.0)));
  const auto t = glorot_uniform_init({20, 30}, 30, 20, 9);
  CHECK(t.size() == 600);
  double mean = 0;
  for (double v : t.data) {
    CHECK(std::abs(v) <= lim);
    mean += v;
  }
  CHECK(std::abs(mean / 600) < 0.1 * lim);
  CHECK(glorot_uniform_init({20, 30}, 30, 20, 9) == t);
  CHECK_FALSE(glorot_uniform_init({20, 30}, 30, 20, 10) == t);
}

TEST_CASE("network shapes, params and forward") {
  Network net({1, 8, 8}, {LayerSpec::conv2d(3, 3, 2, 1, 1), LayerSpec::relu(), LayerSpec::max_pool(2, 2, 2, 2),
                          LayerSpec::dense(3), LayerSpec::softmax()},
              5);
  CHECK(net.layer_output(0) == Shape3{2, 8, 8});
  CHECK(net.layer_output(2) == Shape3{2, 4, 4});
  CHECK(net.output_shape().size() == 3);
  CHECK(net.param_count() == 2 * 9 + 2 + 32 * 3 + 3);
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    const auto& s = net.param_slice(l);
    if (l == 0 || l == 3) {
      for (std::size_t i = 0; i < s.bias_size; ++i) CHECK(net.params()[s.bias_offset + i] == 0.0);
    }
  }
  Rng rng(3);
  Tensor batch({4, 1, 8, 8}, random_vec(rng, 4 * 64));
  const auto out = net.predict(batch);
  CHECK(out.shape == std::vector<std::size_t>{4, 3});
  for (std::size_t b = 0; b < 4; ++b) CHECK(out.data[3 * b] + out.data[3 * b + 1] + out.data[3 * b + 2] == doctest::Approx(1.0));
  CHECK(Network({1, 8, 8}, net.layers(), 5) == net);
  CHECK_THROWS_AS(Network({1, 2, 2}, {LayerSpec::conv2d(3, 3, 1, 1, 1, Padding::Valid)}, 1), ShapeError);
}

TEST_CASE("batched forward equals per-sample forward") {
  Network net({2, 6, 6}, {LayerSpec::conv2d(3, 3, 3, 2, 2), LayerSpec::sigmoid(), LayerSpec::dense(2)}, 8);
  Rng rng(4);
  const auto x = random_vec(rng, 5 * net.input_shape().size());
  const auto all = net.forward(x, 5);
  for (std::size_t b = 0; b < 5; ++b) {
    std::span<const double> one(x.data() + b * net.input_shape().size(), net.input_shape().size());
    const auto single = net.forward(one, 1);
    for (std::size_t k = 0; k < 2; ++k) CHECK(single.output()[k] == all.output()[2 * b + k]);
  }
}

}  // TEST_SUITE
