#include "driftids/numgrad/layers.hpp"

#include <cmath>

#include "driftids/numgrad/kernels.hpp"

namespace driftids::numgrad {

double sigmoid(double z) {
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

LstmStep lstm_cell_forward(const Matrix& x, const Matrix& h_prev, const Matrix& c_prev,
                           const LstmWeights& w) {
    const std::size_t batch = x.rows();
    const std::size_t input_dim = x.cols();
    const std::size_t hidden = w.recurrent.rows();
    require_shape(w.input, input_dim, 4 * hidden, "lstm input weights");
    require_shape(w.recurrent, hidden, 4 * hidden, "lstm recurrent weights");
    require_shape(w.bias, 1, 4 * hidden, "lstm bias");
    require_shape(h_prev, batch, hidden, "lstm h_prev");
    require_shape(c_prev, batch, hidden, "lstm c_prev");

    Matrix z;
    kernels::gemm_nn(x, w.input, z);
    kernels::gemm_nn(h_prev, w.recurrent, z, Accumulate::yes);
    kernels::add_row_bias(z, w.bias);

    LstmStep out;
    LstmCache& cache = out.cache;
    cache.x = x;
    cache.h_prev = h_prev;
    cache.c_prev = c_prev;
    cache.gate_i = Matrix(batch, hidden);
    cache.gate_f = Matrix(batch, hidden);
    cache.gate_g = Matrix(batch, hidden);
    cache.gate_o = Matrix(batch, hidden);
    cache.tanh_c = Matrix(batch, hidden);
    cache.input_dim = input_dim;
    cache.hidden = hidden;
    out.h = Matrix(batch, hidden);
    out.c = Matrix(batch, hidden);

    for (std::size_t b = 0; b < batch; ++b) {
        const auto zr = z.row(b);
        for (std::size_t k = 0; k < hidden; ++k) {
            const double gi = sigmoid(zr[k]);
            const double gf = sigmoid(zr[hidden + k]);
            const double gg = std::tanh(zr[2 * hidden + k]);
            const double go = sigmoid(zr[3 * hidden + k]);
            const double c = gf * c_prev(b, k) + gi * gg;
            const double tc = std::tanh(c);
            cache.gate_i(b, k) = gi;
            cache.gate_f(b, k) = gf;
            cache.gate_g(b, k) = gg;
            cache.gate_o(b, k) = go;
            cache.tanh_c(b, k) = tc;
            out.c(b, k) = c;
            out.h(b, k) = go * tc;
        }
    }
    return out;
}

LstmCellGrads lstm_cell_backward(const Matrix& d_h, const Matrix& d_c, const LstmCache& cache,
                                 const LstmWeights& w, const LstmGradRefs& grads) {
    const std::size_t batch = cache.x.rows();
    const std::size_t hidden = cache.hidden;
    require(hidden > 0 && cache.gate_i.rows() == batch && cache.gate_i.cols() == hidden,
            ErrorKind::contract, "lstm backward: cache was not produced by a forward pass");
    require(w.recurrent.rows() == hidden && w.input.rows() == cache.input_dim,
            ErrorKind::contract, "lstm backward: cache does not match these weights");
    require_shape(d_h, batch, hidden, "lstm d_h");
    require_shape(d_c, batch, hidden, "lstm d_c");
    require_shape(grads.input, cache.input_dim, 4 * hidden, "lstm input weight grad");
    require_shape(grads.recurrent, hidden, 4 * hidden, "lstm recurrent weight grad");
    require_shape(grads.bias, 1, 4 * hidden, "lstm bias grad");

    Matrix dz(batch, 4 * hidden);
    LstmCellGrads out;
    out.d_c_prev = Matrix(batch, hidden);
    for (std::size_t b = 0; b < batch; ++b) {
        auto dzr = dz.row(b);
        for (std::size_t k = 0; k < hidden; ++k) {
            const double gi = cache.gate_i(b, k);
            const double gf = cache.gate_f(b, k);
            const double gg = cache.gate_g(b, k);
            const double go = cache.gate_o(b, k);
            const double tc = cache.tanh_c(b, k);
            const double dh = d_h(b, k);
            const double dc = d_c(b, k) + dh * go * (1.0 - tc * tc);
            dzr[k] = dc * gg * gi * (1.0 - gi);
            dzr[hidden + k] = dc * cache.c_prev(b, k) * gf * (1.0 - gf);
            dzr[2 * hidden + k] = dc * gi * (1.0 - gg * gg);
            dzr[3 * hidden + k] = dh * tc * go * (1.0 - go);
            out.d_c_prev(b, k) = dc * gf;
        }
    }

    kernels::gemm_tn(cache.x, dz, grads.input, Accumulate::yes);
    kernels::gemm_tn(cache.h_prev, dz, grads.recurrent, Accumulate::yes);
    kernels::col_sum(dz, grads.bias, Accumulate::yes);
    kernels::gemm_nt(dz, w.input, out.d_x);
    kernels::gemm_nt(dz, w.recurrent, out.d_h_prev);
    return out;
}

Matrix dense_forward(const Matrix& x, const Matrix& weight, const Matrix& bias,
                     Activation activation, DenseCache* cache) {
    require(x.cols() == weight.rows(), ErrorKind::dimension,
            "dense input " + shape_string(x) + " vs weight " + shape_string(weight));
    require_shape(bias, 1, weight.cols(), "dense bias");
    Matrix pre;
    kernels::gemm_nn(x, weight, pre);
    kernels::add_row_bias(pre, bias);
    Matrix y = pre;
    if (activation == Activation::relu) {
        for (double& v : y.values()) {
            v = v > 0.0 ? v : 0.0;
        }
    }
    if (cache != nullptr) {
        cache->x = x;
        cache->pre = std::move(pre);
        cache->activation = activation;
    }
    return y;
}

DenseGrads dense_backward(const Matrix& d_y, const DenseCache& cache, const Matrix& weight) {
    require_shape(d_y, cache.pre.rows(), cache.pre.cols(), "dense d_y");
    require(cache.x.cols() == weight.rows() && cache.pre.cols() == weight.cols(),
            ErrorKind::contract, "dense backward: cache does not match weight");
    Matrix d_pre = d_y;
    if (cache.activation == Activation::relu) {
        auto pre = cache.pre.values();
        auto d = d_pre.values();
        for (std::size_t k = 0; k < d.size(); ++k) {
            if (!(pre[k] > 0.0)) {
                d[k] = 0.0;
            }
        }
    }
    DenseGrads out;
    kernels::gemm_tn(cache.x, d_pre, out.d_weight);
    kernels::col_sum(d_pre, out.d_bias);
    kernels::gemm_nt(d_pre, weight, out.d_x);
    return out;
}

}  // namespace driftids::numgrad
