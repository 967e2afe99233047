// Parallel kernels vs. the serial reference at the shapes training uses
// (batch 256, 14 inputs, hidden 64 → 4H = 256 gate columns).
#include <benchmark/benchmark.h>

#include "driftids/numgrad/kernels.hpp"
#include "driftids/numgrad/layers.hpp"
#include "driftids/rng.hpp"

using namespace driftids;
using namespace driftids::numgrad;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, std::uint64_t seed) {
    Rng rng(seed);
    Matrix m(r, c);
    for (double& v : m.values()) v = rng.uniform(-1.0, 1.0);
    return m;
}

template <void (*Gemm)(const Matrix&, const Matrix&, Matrix&, Accumulate)>
void gemm_nn_bench(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const Matrix a = random_matrix(256, n, 1);
    const Matrix w = random_matrix(n, 4 * n, 2);
    Matrix out;
    for (auto _ : state) {
        Gemm(a, w, out, Accumulate::no);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * 256 * static_cast<std::int64_t>(n * 4 * n));
}

template <void (*Gemm)(const Matrix&, const Matrix&, Matrix&, Accumulate)>
void gemm_tn_bench(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const Matrix a = random_matrix(256, n, 1);
    const Matrix g = random_matrix(256, 4 * n, 2);
    Matrix out;
    for (auto _ : state) {
        Gemm(a, g, out, Accumulate::no);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * 256 * static_cast<std::int64_t>(n * 4 * n));
}

template <void (*Gemm)(const Matrix&, const Matrix&, Matrix&, Accumulate)>
void gemm_nt_bench(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const Matrix g = random_matrix(256, 4 * n, 1);
    const Matrix w = random_matrix(n, 4 * n, 2);
    Matrix out;
    for (auto _ : state) {
        Gemm(g, w, out, Accumulate::no);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * 256 * static_cast<std::int64_t>(n * 4 * n));
}

void lstm_step_bench(benchmark::State& state) {
    const auto h = static_cast<std::size_t>(state.range(0));
    const Matrix x = random_matrix(256, 14, 1);
    const Matrix hp = random_matrix(256, h, 2);
    const Matrix cp = random_matrix(256, h, 3);
    const Matrix W = random_matrix(14, 4 * h, 4);
    const Matrix U = random_matrix(h, 4 * h, 5);
    const Matrix b = random_matrix(1, 4 * h, 6);
    Matrix dW(14, 4 * h), dU(h, 4 * h), db(1, 4 * h);
    for (auto _ : state) {
        auto step = lstm_cell_forward(x, hp, cp, {W, U, b});
        auto back = lstm_cell_backward(step.h, step.c, step.cache, {W, U, b}, {dW, dU, db});
        benchmark::DoNotOptimize(back.d_x.data());
    }
}

}  // namespace

BENCHMARK(gemm_nn_bench<kernels::gemm_nn>)->Name("gemm_nn/parallel")->Arg(32)->Arg(64);
BENCHMARK(gemm_nn_bench<reference::gemm_nn>)->Name("gemm_nn/serial")->Arg(32)->Arg(64);
BENCHMARK(gemm_tn_bench<kernels::gemm_tn>)->Name("gemm_tn/parallel")->Arg(32)->Arg(64);
BENCHMARK(gemm_tn_bench<reference::gemm_tn>)->Name("gemm_tn/serial")->Arg(32)->Arg(64);
BENCHMARK(gemm_nt_bench<kernels::gemm_nt>)->Name("gemm_nt/parallel")->Arg(32)->Arg(64);
BENCHMARK(gemm_nt_bench<reference::gemm_nt>)->Name("gemm_nt/serial")->Arg(32)->Arg(64);
BENCHMARK(lstm_step_bench)->Name("lstm_cell_fwd_bwd")->Arg(16)->Arg(32)->Arg(64);

BENCHMARK_MAIN();
