// OpenMP batch convolution and full network passes against the serial reference.

#include <benchmark/benchmark.h>

#include <vector>

#include "trendcnn/nn/kernels.hpp"
#include "trendcnn/nn/reference.hpp"
#include "trendcnn/random.hpp"
#include "trendcnn/submodels.hpp"

using namespace trendcnn;
using namespace trendcnn::nn;

namespace {

struct ConvCase {
  WindowGeometry g;
  std::vector<double> in, w, b, out;
};

ConvCase make_case(std::size_t batch) {
  ConvCase c;
  c.g = window_geometry({3, 48, 64}, LayerSpec::conv2d(5, 5, 8, 2, 2));
  Rng rng(7);
  c.in.resize(batch * c.g.in.size());
  c.w.resize(c.g.out.channels * c.g.in.channels * 25);
  c.b.resize(c.g.out.channels);
  c.out.resize(batch * c.g.out.size());
  for (auto& v : c.in) v = uniform01(rng);
  for (auto& v : c.w) v = uniform01(rng) - 0.5;
  return c;
}

void BM_ConvReference(benchmark::State& state) {
  const auto batch = static_cast<std::size_t>(state.range(0));
  auto c = make_case(batch);
  for (auto _ : state) {
    reference::conv2d_forward(c.g, batch, c.in.data(), c.w.data(), c.b.data(), c.out.data());
    benchmark::DoNotOptimize(c.out.data());
  }
  state.SetItemsProcessed(static_cast<int64_t>(state.iterations() * batch));
}

void BM_ConvParallel(benchmark::State& state) {
  const auto batch = static_cast<std::size_t>(state.range(0));
  auto c = make_case(batch);
  for (auto _ : state) {
    kernels::conv2d_forward_batch(c.g, batch, c.in.data(), c.w.data(), c.b.data(), c.out.data());
    benchmark::DoNotOptimize(c.out.data());
  }
  state.SetItemsProcessed(static_cast<int64_t>(state.iterations() * batch));
}

void BM_ChpcForwardBackward(benchmark::State& state) {
  const auto batch = static_cast<std::size_t>(state.range(0));
  const Network net = build_chpc({3, 48, 64}, 1);
  std::vector<double> x(batch * net.input_shape().size());
  Rng rng(3);
  for (auto& v : x) v = uniform01(rng);
  std::vector<double> grad_out(batch, 1.0), grads(net.param_count());
  for (auto _ : state) {
    const auto cache = net.forward(x, batch);
    net.backward(cache, grad_out, grads);
    benchmark::DoNotOptimize(grads.data());
  }
  state.SetItemsProcessed(static_cast<int64_t>(state.iterations() * batch));
}

}  // namespace

BENCHMARK(BM_ConvReference)->Arg(8)->Arg(64);
BENCHMARK(BM_ConvParallel)->Arg(8)->Arg(64);
BENCHMARK(BM_ChpcForwardBackward)->Arg(8)->Arg(64);

BENCHMARK_MAIN();
