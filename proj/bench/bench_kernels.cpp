// Serial reference kernels against their OpenMP counterparts.
//
//   bench_kernels --benchmark_filter=ssim
//   OMP_NUM_THREADS=4 bench_kernels

#include <random>

#include <benchmark/benchmark.h>

#include "framesift/kernels.hpp"

using namespace framesift;

namespace {

GrayImage random_image(int w, int h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  GrayImage img(w, h);
  for (auto& p : img.pixels) p = u(rng);
  return img;
}

Matrix random_points(Eigen::Index n, Eigen::Index d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Matrix x(n, d);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = g(rng);
  return x;
}

template <double (*Fn)(const GrayImage&, const GrayImage&, const SsimParams&)>
void BM_ssim(benchmark::State& state) {
  const int w = static_cast<int>(state.range(0)), h = w * 3 / 4;
  const auto a = random_image(w, h, 1), b = random_image(w, h, 2);
  for (auto _ : state) benchmark::DoNotOptimize(Fn(a, b, SsimParams{}));
  state.SetItemsProcessed(state.iterations() * w * h);
}

template <double (*Fn)(const GrayImage&)>
void BM_laplacian(benchmark::State& state) {
  const int w = static_cast<int>(state.range(0));
  const auto a = random_image(w, w * 3 / 4, 3);
  for (auto _ : state) benchmark::DoNotOptimize(Fn(a));
}

template <Matrix (*Fn)(const Matrix&, double)>
void BM_rbf(benchmark::State& state) {
  const auto x = random_points(state.range(0), 10, 4);
  for (auto _ : state) benchmark::DoNotOptimize(Fn(x, 0.5));
}

template <Matrix (*Fn)(const Matrix&, int)>
void BM_knn(benchmark::State& state) {
  const auto x = random_points(state.range(0), 10, 5);
  for (auto _ : state) benchmark::DoNotOptimize(Fn(x, 7));
}

template <Matrix (*Fn)(const Matrix&)>
void BM_normalize(benchmark::State& state) {
  const Matrix w = kernels::serial::rbf_affinity(random_points(state.range(0), 10, 6), 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(Fn(w));
}

template <void (*Fn)(const Matrix&, const Matrix&, const Matrix&, double, Matrix&)>
void BM_spread_step(benchmark::State& state) {
  const auto n = state.range(0);
  const Matrix s = kernels::serial::normalize_laplacian(kernels::serial::rbf_affinity(random_points(n, 10, 7), 0.5));
  const Matrix y0 = random_points(n, 4, 8).cwiseAbs();
  Matrix y = y0, out(n, 4);
  for (auto _ : state) {
    Fn(s, y, y0, 0.9, out);
    benchmark::DoNotOptimize(out.data());
  }
}

}  // namespace

BENCHMARK(BM_ssim<kernels::serial::ssim>)->Name("ssim/serial")->Arg(160)->Arg(640);
BENCHMARK(BM_ssim<kernels::parallel::ssim>)->Name("ssim/parallel")->Arg(160)->Arg(640);
BENCHMARK(BM_laplacian<kernels::serial::laplacian_variance>)->Name("laplacian/serial")->Arg(640)->Arg(1280);
BENCHMARK(BM_laplacian<kernels::parallel::laplacian_variance>)->Name("laplacian/parallel")->Arg(640)->Arg(1280);
BENCHMARK(BM_rbf<kernels::serial::rbf_affinity>)->Name("rbf/serial")->Arg(500)->Arg(2000);
BENCHMARK(BM_rbf<kernels::parallel::rbf_affinity>)->Name("rbf/parallel")->Arg(500)->Arg(2000);
BENCHMARK(BM_knn<kernels::serial::knn_affinity>)->Name("knn/serial")->Arg(500)->Arg(2000);
BENCHMARK(BM_knn<kernels::parallel::knn_affinity>)->Name("knn/parallel")->Arg(500)->Arg(2000);
BENCHMARK(BM_normalize<kernels::serial::normalize_laplacian>)->Name("normalize/serial")->Arg(2000);
BENCHMARK(BM_normalize<kernels::parallel::normalize_laplacian>)->Name("normalize/parallel")->Arg(2000);
BENCHMARK(BM_spread_step<kernels::serial::spread_step>)->Name("spread_step/serial")->Arg(2000);
BENCHMARK(BM_spread_step<kernels::parallel::spread_step>)->Name("spread_step/parallel")->Arg(2000);

BENCHMARK_MAIN();
