#include <benchmark/benchmark.h>

#include "dcn/layers.hpp"
#include "dcn/rng.hpp"
#include "dcn/tensor.hpp"

namespace {

dcn::Tensor random_tensor(std::vector<std::size_t> shape, std::uint64_t seed) {
  dcn::Tensor t(std::move(shape));
  dcn::Rng rng(seed);
  for (double& v : t.values()) v = rng.normal();
  return t;
}

void BM_ConvForward(benchmark::State& state) {
  const std::size_t channels = static_cast<std::size_t>(state.range(0));
  const std::size_t kernels = static_cast<std::size_t>(state.range(1));
  const std::size_t side = static_cast<std::size_t>(state.range(2));
  dcn::Tensor input = random_tensor({channels, side, side}, 1);
  dcn::ConvParams p;
  p.kernels = random_tensor({kernels, channels, 5, 5}, 2);
  p.bias = random_tensor({kernels}, 3);
  p.stride = 1;
  p.padding = 2;
  for (auto _ : state) {
    benchmark::DoNotOptimize(dcn::conv2d_forward(input, p));
  }
}
BENCHMARK(BM_ConvForward)
    ->Args({3, 16, 32})
    ->Args({16, 32, 16})
    ->Args({3, 64, 64});

void BM_ConvBackward(benchmark::State& state) {
  const std::size_t channels = static_cast<std::size_t>(state.range(0));
  const std::size_t kernels = static_cast<std::size_t>(state.range(1));
  const std::size_t side = static_cast<std::size_t>(state.range(2));
  dcn::Tensor input = random_tensor({channels, side, side}, 1);
  dcn::ConvParams p;
  p.kernels = random_tensor({kernels, channels, 5, 5}, 2);
  p.bias = random_tensor({kernels}, 3);
  p.stride = 1;
  p.padding = 2;
  dcn::Tensor grad = random_tensor({kernels, side, side}, 4);
  for (auto _ : state) {
    benchmark::DoNotOptimize(dcn::conv2d_backward(input, p, grad));
  }
}
BENCHMARK(BM_ConvBackward)->Args({3, 16, 32})->Args({16, 32, 16});

void BM_Matmul(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  dcn::Tensor a = random_tensor({n, n}, 5);
  dcn::Tensor b = random_tensor({n, n}, 6);
  for (auto _ : state) {
    benchmark::DoNotOptimize(dcn::matmul(a, b));
  }
}
BENCHMARK(BM_Matmul)->Arg(64)->Arg(128)->Arg(256);

void BM_MaxPool(benchmark::State& state) {
  const std::size_t side = static_cast<std::size_t>(state.range(0));
  dcn::Tensor input = random_tensor({32, side, side}, 7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(dcn::maxpool_forward(input, 3, 2));
  }
}
BENCHMARK(BM_MaxPool)->Arg(16)->Arg(32)->Arg(64);

void BM_FcForward(benchmark::State& state) {
  const std::size_t in = static_cast<std::size_t>(state.range(0));
  const std::size_t out = static_cast<std::size_t>(state.range(1));
  dcn::Tensor input = random_tensor({in}, 8);
  dcn::FcParams p;
  p.weight = random_tensor({out, in}, 9);
  p.bias = random_tensor({out}, 10);
  for (auto _ : state) {
    benchmark::DoNotOptimize(dcn::fc_forward(input, p));
  }
}
BENCHMARK(BM_FcForward)->Args({1024, 256})->Args({4096, 1024});

}  // namespace

BENCHMARK_MAIN();
