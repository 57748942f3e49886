// Serial reference vs OpenMP kernels at the shapes the solvers hit.

#include <benchmark/benchmark.h>

#include <random>

#include "invclass/kernels.hpp"

namespace {

using invclass::Matrix;
using invclass::RowMatrix;
using invclass::Vector;
namespace kernels = invclass::kernels;

struct Data {
  RowMatrix a;
  Vector b;
  Vector x;
  Vector w;
};

Data make_data(Eigen::Index k, Eigen::Index d) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n01;
  Data out{RowMatrix(k, d), Vector(k), Vector(d), Vector(k)};
  for (Eigen::Index i = 0; i < out.a.size(); ++i) out.a.data()[i] = n01(rng);
  for (Eigen::Index i = 0; i < k; ++i) {
    out.b[i] = n01(rng);
    out.w[i] = n01(rng);
  }
  for (Eigen::Index j = 0; j < d; ++j) out.x[j] = n01(rng);
  return out;
}

template <void (*F)(const RowMatrix&, const Vector&, const Vector&, Vector&)>
void bm_affine(benchmark::State& state) {
  const Data s = make_data(state.range(0), state.range(1));
  Vector out;
  for (auto _ : state) {
    F(s.a, s.b, s.x, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetBytesProcessed(state.iterations() * s.a.size() * static_cast<int64_t>(sizeof(double)));
}

template <void (*F)(const RowMatrix&, const Vector&, Vector&)>
void bm_matvec_transpose(benchmark::State& state) {
  const Data s = make_data(state.range(0), state.range(1));
  Vector out;
  for (auto _ : state) {
    F(s.a, s.w, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetBytesProcessed(state.iterations() * s.a.size() * static_cast<int64_t>(sizeof(double)));
}

template <Matrix (*F)(const RowMatrix&)>
void bm_gram(benchmark::State& state) {
  const Data s = make_data(state.range(0), state.range(1));
  for (auto _ : state) {
    Matrix g = F(s.a);
    benchmark::DoNotOptimize(g.data());
  }
}

template <double (*F)(const Vector&, const Vector&)>
void bm_dot(benchmark::State& state) {
  const Data s = make_data(1, state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(F(s.x, s.x));
}

void shapes(benchmark::internal::Benchmark* b) {
  b->Args({10, 784})->Args({100, 1568})->Args({16, 100000})->Args({10, 1000000});
}

}  // namespace

BENCHMARK(bm_affine<kernels::serial::affine>)->Name("affine/serial")->Apply(shapes);
BENCHMARK(bm_affine<kernels::omp::affine>)->Name("affine/omp")->Apply(shapes);
BENCHMARK(bm_matvec_transpose<kernels::serial::matvec_transpose>)->Name("matvec_transpose/serial")->Apply(shapes);
BENCHMARK(bm_matvec_transpose<kernels::omp::matvec_transpose>)->Name("matvec_transpose/omp")->Apply(shapes);
BENCHMARK(bm_gram<kernels::serial::gram>)->Name("gram/serial")->Apply(shapes);
BENCHMARK(bm_gram<kernels::omp::gram>)->Name("gram/omp")->Apply(shapes);
BENCHMARK(bm_dot<kernels::serial::dot>)->Name("dot/serial")->Apply(shapes);
BENCHMARK(bm_dot<kernels::omp::dot>)->Name("dot/omp")->Apply(shapes);

BENCHMARK_MAIN();
