#pragma once

#include <cstddef>

#include "driftids/numgrad/matrix.hpp"

// Dense products used by every layer. The `kernels` versions are OpenMP
// parallel over output rows; `reference` keeps the plain serial loops for
// testing and benchmarking. Each output element is reduced in the same order
// in both, so results are bit-identical regardless of thread count.
namespace driftids::numgrad {

enum class Accumulate { no, yes };

namespace kernels {

// out[B×N] (+)= a[B×K] · w[K×N]
void gemm_nn(const Matrix& a, const Matrix& w, Matrix& out, Accumulate acc = Accumulate::no);
// out[K×N] (+)= aᵀ · g   with a[B×K], g[B×N]
void gemm_tn(const Matrix& a, const Matrix& g, Matrix& out, Accumulate acc = Accumulate::no);
// out[B×K] (+)= g · wᵀ   with g[B×N], w[K×N]
void gemm_nt(const Matrix& g, const Matrix& w, Matrix& out, Accumulate acc = Accumulate::no);
// out[1×N] (+)= column sums of g
void col_sum(const Matrix& g, Matrix& out, Accumulate acc = Accumulate::no);
// out[B×N] += bias[1×N] broadcast over rows
void add_row_bias(Matrix& out, const Matrix& bias);

// Work (multiply-adds) above which the loops fork threads.
inline constexpr std::size_t kParallelWork = 1u << 16;

// Thread count the kernels will use (1 when built without OpenMP).
int max_threads();
void set_threads(int n);

}  // namespace kernels

namespace reference {

void gemm_nn(const Matrix& a, const Matrix& w, Matrix& out, Accumulate acc = Accumulate::no);
void gemm_tn(const Matrix& a, const Matrix& g, Matrix& out, Accumulate acc = Accumulate::no);
void gemm_nt(const Matrix& g, const Matrix& w, Matrix& out, Accumulate acc = Accumulate::no);
void col_sum(const Matrix& g, Matrix& out, Accumulate acc = Accumulate::no);

}  // namespace reference

}  // namespace driftids::numgrad
