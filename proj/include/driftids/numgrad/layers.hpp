#pragma once

#include <cstddef>

#include "driftids/numgrad/matrix.hpp"

namespace driftids::numgrad {

// LSTM weights. Gate columns are laid out [input | forget | candidate | output],
// each block `hidden` wide.
struct LstmWeights {
    const Matrix& input;      // I × 4H
    const Matrix& recurrent;  // H × 4H
    const Matrix& bias;       // 1 × 4H
};

struct LstmGradRefs {
    Matrix& input;
    Matrix& recurrent;
    Matrix& bias;
};

struct LstmCache {
    Matrix x;
    Matrix h_prev;
    Matrix c_prev;
    Matrix gate_i;
    Matrix gate_f;
    Matrix gate_g;
    Matrix gate_o;
    Matrix tanh_c;
    std::size_t input_dim = 0;
    std::size_t hidden = 0;
};

struct LstmStep {
    Matrix h;
    Matrix c;
    LstmCache cache;
};

struct LstmCellGrads {
    Matrix d_x;
    Matrix d_h_prev;
    Matrix d_c_prev;
};

LstmStep lstm_cell_forward(const Matrix& x, const Matrix& h_prev, const Matrix& c_prev,
                           const LstmWeights& w);

// Accumulates weight gradients into `grads` and returns the input-side
// gradients of the step.
LstmCellGrads lstm_cell_backward(const Matrix& d_h, const Matrix& d_c, const LstmCache& cache,
                                 const LstmWeights& w, const LstmGradRefs& grads);

enum class Activation { none, relu };

struct DenseCache {
    Matrix x;
    Matrix pre;
    Activation activation = Activation::none;
};

struct DenseGrads {
    Matrix d_weight;
    Matrix d_bias;
    Matrix d_x;
};

// y = act(x·W + b), W is in × out.
Matrix dense_forward(const Matrix& x, const Matrix& weight, const Matrix& bias,
                     Activation activation, DenseCache* cache = nullptr);

// ReLU subgradient at 0 is 0.
DenseGrads dense_backward(const Matrix& d_y, const DenseCache& cache, const Matrix& weight);

double sigmoid(double z);

}  // namespace driftids::numgrad
